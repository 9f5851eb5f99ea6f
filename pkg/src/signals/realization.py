"""
Input Realization - The input actually fed to a subsystem on one macro interval.
Combines the new extrapolant, an optional S-curve switch from the previous
extrapolant, and scheduled hat corrections.
"""
from dataclasses import dataclass, field
from typing import Any, Iterable

from numpy.polynomial import Polynomial

from src.errors import SignalError
from src.shapes import IntervalShape, ShapeKind, place_on_interval
from src.shapes.kernels import switch_polynomial
from src.signals.extrapolation import ExtrapolantSegment, Interval, prolong, same_time


@dataclass(frozen=True)
class InputRealization:
    """
    Realized input on one interval.

    Without a switch: base(t) + corrections(t).
    With a switch: (1 - psi(t)) prev(t) + psi(t) base(t) + corrections(t).
    """

    interval: Interval
    base: ExtrapolantSegment
    prev: ExtrapolantSegment | None = None
    switch: IntervalShape | None = None
    corrections: tuple[tuple[float, IntervalShape], ...] = field(default_factory=tuple)

    def __post_init__(self):
        if (self.prev is None) != (self.switch is None):
            raise SignalError("Smoothed realization needs both a previous extrapolant and a switch shape")

    @property
    def smoothed(self) -> bool:
        return self.switch is not None

    def base_value(self, t):
        """Extrapolated (and switched) input, corrections excluded."""
        if self.switch is None:
            return self.base.value(t)
        psi = self.switch.value(t)
        return (1.0 - psi) * self.prev.value(t) + psi * self.base.value(t)

    def correction_value(self, t):
        total = 0.0 * t
        for amount, shape in self.corrections:
            total = total + amount * shape.value(t)
        return total

    def value(self, t):
        return self.base_value(t) + self.correction_value(t)

    def __call__(self, t):
        return self.value(t)

    def derivative(self, t, order: int = 1):
        """
        Closed-form time derivative of the realized input.

        Args:
            t: Time (scalar or array).
            order: 1 or 2.
        """
        if order not in (1, 2):
            raise SignalError(f"Derivative order must be 1 or 2, got {order!r}")

        if self.switch is None:
            result = self.base.derivative(t, order)
        else:
            gap = self.base.value(t) - self.prev.value(t)
            gap_rate = self.base.slope - self.prev.slope
            if order == 1:
                result = self.prev.slope + self.switch.derivative(t, 1) * gap + self.switch.value(t) * gap_rate
            else:
                result = self.switch.derivative(t, 2) * gap + 2.0 * self.switch.derivative(t, 1) * gap_rate

        for amount, shape in self.corrections:
            result = result + amount * shape.derivative(t, order)
        return result


def _as_pair(correction: Any) -> tuple[float, IntervalShape]:
    if isinstance(correction, tuple):
        amount, shape = correction
    else:
        amount, shape = correction.amount, correction.shape
    return float(amount), shape


def realize(
    prev: ExtrapolantSegment | None,
    base: ExtrapolantSegment,
    smoothing: bool,
    corrections: Iterable[Any],
    interval: Interval,
) -> InputRealization:
    """
    Build the realization for one interval.

    Args:
        prev: Previous extrapolant (on the preceding or the same interval).
        base: New extrapolant on this interval.
        smoothing: Switch from prev to base over the whole interval.
        corrections: (amount, shape) pairs or ledger entries.
        interval: The macro interval.

    Returns:
        The realization.
    """
    if not (same_time(base.t_start, interval.t_start) and same_time(base.t_end, interval.t_end)):
        raise SignalError(f"Base extrapolant window [{base.t_start}, {base.t_end}) does not match the interval")

    pairs = tuple(_as_pair(c) for c in corrections)
    if not smoothing:
        return InputRealization(interval=interval, base=base, corrections=pairs)

    if prev is None:
        raise SignalError("Smoothing needs a previous extrapolant; switch shape cannot be built")
    if not same_time(prev.t_start, interval.t_start):
        prev = prolong(prev, interval)
    switch = place_on_interval(ShapeKind.INTEGRAL_OF_HAT_SWITCH, interval.t_start, interval.t_end)
    return InputRealization(interval=interval, base=base, prev=prev, switch=switch, corrections=pairs)


def integrate_realization(r: InputRealization, with_corrections: bool = False) -> float:
    """
    Exact integral of a realization over its interval.

    Args:
        r: The realization.
        with_corrections: Include the scheduled corrections' share inside the interval.

    Returns:
        The integral; the "used" integral when with_corrections is False.
    """
    a, b = r.interval.t_start, r.interval.t_end
    length = r.interval.length

    if r.switch is None:
        total = r.base.integral(a, b)
    else:
        # gap b - p written in the reference coordinate x, t = a + (x + 1) L / 2
        gap0 = r.base.value(a) - r.prev.value(a)
        gap_rate = r.base.slope - r.prev.slope
        gap = Polynomial([gap0 + 0.5 * gap_rate * length, 0.5 * gap_rate * length])
        weighted = (switch_polynomial() * gap).integ(lbnd=-1.0)
        total = r.prev.integral(a, b) + 0.5 * length * float(weighted(1.0))

    if with_corrections:
        total += sum(amount * shape.integral(a, b) for amount, shape in r.corrections)
    return float(total)
