"""
Micro Integrator - Subsystem-local adaptive solves between exchange times.
Output integrals ride along as extra quadrature states.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from src.config import settings
from src.errors import ConfigError, NumericalFailure

logger = logging.getLogger(__name__)

EXPLICIT_METHODS = ("RK45", "RK23", "DOP853")

InputEvaluator = Callable[[float], float]


@dataclass(frozen=True)
class MicroIntegrator:
    """Embedded explicit Runge-Kutta settings for scipy's solve_ivp."""

    method: str = "RK45"
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_step: float | None = None

    def __post_init__(self):
        if self.method not in EXPLICIT_METHODS:
            raise ConfigError(f"Micro method must be one of {EXPLICIT_METHODS}, got {self.method!r}")
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ConfigError(f"Micro tolerances must be positive, got {self.abs_tol}, {self.rel_tol}")

    @classmethod
    def from_settings(cls) -> "MicroIntegrator":
        micro = settings()["micro"]
        return cls(
            method=micro["method"],
            abs_tol=float(micro["abs_tol"]),
            rel_tol=float(micro["rel_tol"]),
            max_step=micro.get("max_step"),
        )

    def solve(self, fun, t0: float, t1: float, y0: np.ndarray, t_eval: np.ndarray | None = None):
        sol = solve_ivp(
            fun,
            (t0, t1),
            y0,
            method=self.method,
            rtol=self.rel_tol,
            atol=self.abs_tol,
            max_step=np.inf if self.max_step is None else self.max_step,
            t_eval=t_eval,
        )
        if not sol.success:
            raise NumericalFailure(f"Micro integration failed: {sol.message}", t=float(sol.t[-1]) if sol.t.size else t0)
        if not np.all(np.isfinite(sol.y)):
            bad = int(np.argmax(~np.all(np.isfinite(sol.y), axis=0)))
            raise NumericalFailure("Non-finite state in micro integration", t=float(sol.t[bad]))
        return sol


@dataclass
class MicroResult:
    """Dense samples of one subsystem over one macro interval."""

    t: np.ndarray
    states: np.ndarray  # (len(t), n_state)
    output_integrals: np.ndarray


def micro_advance(
    sub,
    realizations: Sequence[InputEvaluator],
    t0: float,
    t1: float,
    integ: MicroIntegrator,
    dense: int | None = None,
) -> MicroResult:
    """
    Advance a subsystem over [t0, t1] with frozen input realizations.

    Args:
        sub: Subsystem; its state and accumulators are updated in place.
        realizations: One evaluator per input, in input order.
        t0: Interval start (current subsystem time).
        t1: Interval end.
        integ: Micro integrator settings.
        dense: Uniform samples per interval; None keeps the endpoints only.

    Returns:
        MicroResult with the dense trace and the step's output integrals.
    """
    if not t1 > t0:
        raise ValueError(f"Macro interval must have t0 < t1, got [{t0}, {t1}]")

    spec = sub.spec
    n = spec.n_state

    def fun(t, z):
        x = z[:n]
        u = np.array([r(t) for r in realizations], dtype=float)
        return np.concatenate([spec.rhs(t, x, u), np.atleast_1d(spec.output(t, x))])

    z0 = np.concatenate([sub.state, np.zeros(spec.n_out)])
    t_eval = np.linspace(t0, t1, dense + 1) if dense else None
    sol = integ.solve(fun, t0, t1, z0, t_eval)

    sub.state = sol.y[:n, -1].copy()
    sub.accumulators = sol.y[n:, -1].copy()
    return MicroResult(t=sol.t, states=sol.y[:n].T.copy(), output_integrals=sub.accumulators.copy())


def solve_monolithic(model, t_eval: np.ndarray, initial=None, integ: MicroIntegrator | None = None) -> np.ndarray:
    """
    Integrate a model's coupled system with the micro integrator.

    Returns:
        States at t_eval, shape (len(t_eval), n_state).
    """
    integ = integ or MicroIntegrator.from_settings()
    x0 = model.initial_state() if initial is None else model.check_state(initial)
    sol = integ.solve(model.monolithic_rhs, float(t_eval[0]), float(t_eval[-1]), x0, np.asarray(t_eval, dtype=float))
    return sol.y.T
