"""
Extrapolation - Hold and linear extrapolants built from exchange-time samples.
"""
import math
from dataclasses import dataclass
from typing import Sequence

from numpy.polynomial import Polynomial

from src.errors import CausalityError, SignalError

# Relative slack when matching exchange times computed on the macro grid
TIME_TOL = 1e-12


def same_time(a: float, b: float) -> bool:
    """True if two grid times coincide up to rounding."""
    return abs(a - b) <= TIME_TOL * max(1.0, abs(a), abs(b))


@dataclass(frozen=True)
class Interval:
    """Macro interval [t_start, t_end)."""

    t_start: float
    t_end: float

    def __post_init__(self):
        if not (math.isfinite(self.t_start) and math.isfinite(self.t_end)):
            raise SignalError(f"Interval bounds must be finite: [{self.t_start}, {self.t_end})")
        if not self.t_start < self.t_end:
            raise SignalError(f"Empty interval [{self.t_start}, {self.t_end})")

    @property
    def length(self) -> float:
        return self.t_end - self.t_start


@dataclass(frozen=True)
class SamplePoint:
    """One exchanged value u(t_j)."""

    t: float
    value: float

    def __post_init__(self):
        if not math.isfinite(self.t):
            raise SignalError(f"Sample time must be finite, got {self.t}")
        if not math.isfinite(self.value):
            raise SignalError(f"Sample value at t={self.t} is not finite")


@dataclass(frozen=True)
class ExtrapolantSegment:
    """
    Extrapolant on one interval, stored as c0 + c1 * (t - t_start).

    Attributes:
        interval: Evaluation window.
        coefficients: Ascending coefficients in (t - t_start), length 1 or 2.
        order: Requested extrapolation order; a constant fallback keeps order 1.
    """

    interval: Interval
    coefficients: tuple[float, ...]
    order: int = 0

    @property
    def t_start(self) -> float:
        return self.interval.t_start

    @property
    def t_end(self) -> float:
        return self.interval.t_end

    @property
    def slope(self) -> float:
        return self.coefficients[1] if len(self.coefficients) > 1 else 0.0

    def value(self, t):
        return self.coefficients[0] + self.slope * (t - self.t_start)

    def derivative(self, t, order: int = 1):
        """Time derivative; zero for order 2."""
        if order == 1:
            return self.slope + 0.0 * t
        return 0.0 * t

    def as_polynomial(self) -> Polynomial:
        """Polynomial in the local time t - t_start."""
        return Polynomial(list(self.coefficients))

    def integral(self, a: float, b: float) -> float:
        """Exact integral over [a, b]."""
        sa, sb = a - self.t_start, b - self.t_start
        return self.coefficients[0] * (b - a) + 0.5 * self.slope * (sb * sb - sa * sa)


def extrapolate(history: Sequence[SamplePoint], order: int, interval: Interval) -> ExtrapolantSegment:
    """
    Build the extrapolant for the next interval.

    Args:
        history: Exchange-time samples, strictly increasing in t.
        order: 0 (hold) or 1 (line through the last two samples).
        interval: Interval starting at the last sample time.

    Returns:
        The extrapolant; order 1 with a single sample falls back to a constant.
    """
    if order not in (0, 1):
        raise SignalError(f"Extrapolation order must be 0 or 1, got {order!r}")
    if not history:
        raise SignalError("Cannot extrapolate from an empty history")

    tail = history[-2:] if order == 1 else history[-1:]
    recent = history[-3:]
    for earlier, later in zip(recent, recent[1:]):
        if not later.t > earlier.t:
            raise SignalError(f"Sample times must be strictly increasing (t={earlier.t} then t={later.t})")

    last = history[-1]
    if last.t > interval.t_start and not same_time(last.t, interval.t_start):
        raise CausalityError(f"Sample at t={last.t} lies after interval start {interval.t_start}")
    if not same_time(last.t, interval.t_start):
        raise SignalError(f"Interval must begin at the last sample time {last.t}, got {interval.t_start}")

    if len(tail) < 2:
        return ExtrapolantSegment(interval=interval, coefficients=(last.value,), order=order)

    first, second = tail
    slope = (second.value - first.value) / (second.t - first.t)
    return ExtrapolantSegment(interval=interval, coefficients=(second.value, slope), order=order)


def prolong(segment: ExtrapolantSegment, interval: Interval) -> ExtrapolantSegment:
    """
    Move an extrapolant's evaluation window to the following interval.

    The polynomial is unchanged; only its anchor point moves.
    """
    if not same_time(interval.t_start, segment.t_end):
        raise SignalError(f"Prolonged interval must start at {segment.t_end}, got {interval.t_start}")
    c0 = segment.value(interval.t_start)
    coefficients = (c0, segment.slope) if len(segment.coefficients) > 1 else (c0,)
    return ExtrapolantSegment(interval=interval, coefficients=coefficients, order=segment.order)
