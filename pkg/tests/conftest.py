"""
Shared pytest fixtures.
"""
import numpy as np
import pytest

from src.master.integrator import MicroIntegrator


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


@pytest.fixture
def tight_micro() -> MicroIntegrator:
    """Micro integrator for accuracy tests."""
    return MicroIntegrator(method="RK45", abs_tol=1e-10, rel_tol=1e-10)


@pytest.fixture
def fast_micro() -> MicroIntegrator:
    """Looser micro integrator for the stiff moving-ground runs."""
    return MicroIntegrator(method="RK45", abs_tol=1e-8, rel_tol=1e-8)
