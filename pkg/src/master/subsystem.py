"""
Subsystem - Mutable runtime state of one split-model component.
"""
from typing import Sequence

import numpy as np

from src.master.integrator import InputEvaluator, MicroIntegrator, MicroResult, micro_advance
from src.models import SubsystemSpec


class Subsystem:
    """
    State vector plus output-integral accumulators of one subsystem.

    The accumulators hold the integral of each output over the last
    macro interval; they restart from zero with every advance.
    """

    def __init__(self, spec: SubsystemSpec):
        self.spec = spec
        self.state = np.asarray(spec.initial, dtype=float).copy()
        self.accumulators = np.zeros(spec.n_out)

    @property
    def name(self) -> str:
        return self.spec.name

    def outputs(self, t: float) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.spec.output(t, self.state), dtype=float))

    def advance(
        self,
        realizations: Sequence[InputEvaluator],
        t0: float,
        t1: float,
        integ: MicroIntegrator,
        dense: int | None = None,
    ) -> MicroResult:
        if len(realizations) != self.spec.n_in:
            raise ValueError(f"{self.name} expects {self.spec.n_in} inputs, got {len(realizations)}")
        return micro_advance(self, realizations, t0, t1, integ, dense)

    def __repr__(self) -> str:
        return f"Subsystem({self.name!r}, state={self.state})"
