"""
Shape Placement - Reference shapes mapped affinely onto time intervals.
Hats are scaled by 2/L so that each placed hat integrates to 1; the switch
keeps its [0, 1] range.
"""
import math
from dataclasses import dataclass

import numpy as np

from src.errors import ShapeError
from src.shapes.kernels import (
    ShapeKind,
    hat_cumulative,
    hat_eval,
    shape_derivative,
    smooth_bump_mass,
    switch_cumulative,
    switch_eval,
)


@dataclass(frozen=True)
class IntervalShape:
    """A reference shape placed on [t_start, t_end]."""

    kind: ShapeKind
    t_start: float
    t_end: float

    def __post_init__(self):
        object.__setattr__(self, "kind", ShapeKind(self.kind))
        if not (math.isfinite(self.t_start) and math.isfinite(self.t_end)):
            raise ShapeError(f"Interval bounds must be finite: [{self.t_start}, {self.t_end}]")
        if not self.t_start < self.t_end:
            raise ShapeError(f"Degenerate interval [{self.t_start}, {self.t_end}]: need t_start < t_end")

    @property
    def length(self) -> float:
        return self.t_end - self.t_start

    @property
    def scale(self) -> float:
        """Derivative of the reference coordinate with respect to time."""
        return 2.0 / self.length

    @property
    def _norm(self) -> float:
        return smooth_bump_mass() if self.kind is ShapeKind.SMOOTH_BUMP else 1.0

    def reference(self, t):
        """Map time to the reference coordinate; t_start -> -1, t_end -> 1 exactly."""
        t = np.asarray(t, dtype=float)
        return ((t - self.t_start) - (self.t_end - t)) / self.length

    def value(self, t):
        """Evaluate the placed shape at time t (scalar or array)."""
        x = self.reference(t)
        if self.kind.is_hat:
            return self.scale * hat_eval(self.kind, x) / self._norm
        return switch_eval(x)

    def derivative(self, t, order: int):
        """
        Closed-form time derivative of the placed shape.

        Args:
            t: Time (scalar or array).
            order: 1 or 2.
        """
        x = self.reference(t)
        if self.kind.is_hat:
            return self.scale ** (order + 1) * shape_derivative(self.kind, x, order)
        return self.scale ** order * shape_derivative(self.kind, x, order)

    def cumulative(self, t):
        """Integral of the placed shape from t_start to t."""
        x = self.reference(t)
        if self.kind.is_hat:
            return hat_cumulative(self.kind, x) / self._norm
        return 0.5 * self.length * switch_cumulative(x)

    def integral(self, a, b) -> float:
        """Integral of the placed shape over [a, b]."""
        return self.cumulative(b) - self.cumulative(a)


def place_on_interval(kind: ShapeKind, t_start: float, t_end: float) -> IntervalShape:
    """
    Place a reference shape on a time interval.

    Args:
        kind: Shape kind.
        t_start: Interval start.
        t_end: Interval end, strictly greater than t_start.

    Returns:
        The placed shape.
    """
    return IntervalShape(kind=ShapeKind(kind), t_start=float(t_start), t_end=float(t_end))
