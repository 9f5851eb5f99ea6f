"""
Quadrature - Composite Simpson oracle for normalization and balance checks.
"""
from typing import Callable

import numpy as np
from scipy.integrate import simpson

from src.config import settings
from src.errors import QuadratureError


def quadrature(f: Callable[[float], float], a: float, b: float, panels: int | None = None) -> float:
    """
    Composite Simpson estimate of the integral of f over [a, b].

    Args:
        f: Scalar function of time, evaluated once per node.
        a: Lower bound.
        b: Upper bound.
        panels: Even panel count >= 2. Defaults to config setting.

    Returns:
        The integral estimate.
    """
    if panels is None:
        panels = settings()["quadrature"]["panels"]
    if panels < 2 or panels % 2:
        raise ValueError(f"Simpson quadrature needs an even panel count >= 2, got {panels}")

    nodes = np.linspace(a, b, panels + 1)
    samples = np.array([f(float(t)) for t in nodes], dtype=float)

    bad = ~np.isfinite(samples)
    if bad.any():
        raise QuadratureError("Non-finite integrand sample", t=float(nodes[bad][0]))

    return float(simpson(samples, x=nodes))
