"""
Balance Ledger - Per-channel bookkeeping of balance errors and their refeed.
Errors are split into an extrapolation part and a switching part and fed
back as hat-shaped corrections under a configurable policy.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum

from src.errors import LedgerError
from src.shapes import IntervalShape, ShapeKind, place_on_interval

logger = logging.getLogger(__name__)


class CorrectionPolicy(str, Enum):
    """How balance errors are refed."""

    NONE = "none"
    CLASSIC_1 = "classic_1"
    SMOOTH_1 = "smooth_1"
    SMOOTH_2 = "smooth_2"
    SMOOTH_4 = "smooth_4"
    SPLIT_EARLY = "split_early"

    @classmethod
    def parse(cls, value: "str | CorrectionPolicy") -> "CorrectionPolicy":
        """Accept enum members, values and CLI spellings (classic1, split-early)."""
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        aliases = {"classic1": "classic_1", "smooth1": "smooth_1", "smooth2": "smooth_2", "smooth4": "smooth_4"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            allowed = ", ".join(p.value for p in cls)
            raise LedgerError(f"Unknown correction policy {value!r}; expected one of: {allowed}") from None

    @property
    def support_steps(self) -> int:
        """Macro steps covered by one correction."""
        return {"none": 0, "classic_1": 1, "smooth_1": 1, "smooth_2": 2, "smooth_4": 4, "split_early": 2}[self.value]


class EntryKind(str, Enum):
    CLASSIC = "classic"
    BC_PART = "bc_part"
    SWITCH_PART = "switch_part"


@dataclass(frozen=True)
class BalanceError:
    """Balance error of one macro interval, split into its two causes."""

    step_index: int
    bc_part: float
    switch_part: float

    @property
    def total(self) -> float:
        return self.bc_part + self.switch_part


@dataclass(frozen=True)
class CorrectionEntry:
    """A scheduled refeed delivering `amount` over the support of `shape`."""

    amount: float
    shape: IntervalShape
    source_step: int
    kind: EntryKind = EntryKind.CLASSIC


@dataclass(frozen=True)
class ClosureReport:
    scheduled: float
    delivered: float
    residual: float


@dataclass
class BalanceLedger:
    """Pending and delivered corrections of one input channel."""

    entries: list[CorrectionEntry] = field(default_factory=list)
    _open: list[CorrectionEntry] = field(default_factory=list, init=False, repr=False, compare=False)
    _retired_before: float = field(default=-math.inf, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        self._open = list(self.entries)

    def add(self, entry: CorrectionEntry) -> None:
        if not math.isfinite(entry.amount):
            raise LedgerError(f"Correction amount from step {entry.source_step} is not finite")
        self.entries.append(entry)
        self._open.append(entry)

    def active(self, t_start: float, t_end: float) -> list[CorrectionEntry]:
        """
        Entries whose support overlaps (t_start, t_end).

        Entries ending by t_start are retired from the open list, so a forward
        sweep over the intervals only looks at corrections still in flight.
        """
        if t_start >= self._retired_before:
            self._open = [e for e in self._open if e.shape.t_end > t_start]
            self._retired_before = t_start
            pool = self._open
        else:
            pool = self.entries
        return [e for e in pool if e.shape.t_start < t_end and e.shape.t_end > t_start]

    def correction_at(self, t: float) -> float:
        return correction_at(self, t)

    @property
    def scheduled(self) -> float:
        return math.fsum(e.amount for e in self.entries)

    def delivered(self, t: float) -> float:
        """Quantity delivered by all entries up to time t."""
        return math.fsum(e.amount * e.shape.cumulative(t) for e in self.entries)

    def residual(self, t: float) -> float:
        return self.scheduled - self.delivered(t)

    def switch_share(self) -> float:
        """Fraction of the refed magnitude that came from switching errors."""
        total = math.fsum(abs(e.amount) for e in self.entries)
        switch = math.fsum(abs(e.amount) for e in self.entries if e.kind is EntryKind.SWITCH_PART)
        return switch / total if total > 0.0 else 0.0


def step_error(true_integral: float, used_integral: float) -> float:
    """Balance error of one interval: true minus used integral."""
    return true_integral - used_integral


def split_error(true_integral: float, ext_integral: float, smoothed_integral: float, step_index: int = 0) -> BalanceError:
    """
    Split a balance error into extrapolation and switching parts.

    Args:
        true_integral: Integral of the sender's output over the interval.
        ext_integral: Integral of the new extrapolant.
        smoothed_integral: Integral of the switched realization, corrections excluded.
        step_index: Index j of the exchange time closing the interval.
    """
    return BalanceError(
        step_index=step_index,
        bc_part=true_integral - ext_integral,
        switch_part=ext_integral - smoothed_integral,
    )


def _placed(kind: ShapeKind, t_start: float, width: float) -> IntervalShape:
    return place_on_interval(kind, t_start, t_start + width)


def schedule_switch_part(ledger: BalanceLedger, amount: float, t_start: float, H: float, step_index: int) -> None:
    """Refeed a switching error over [t_start, t_start + 2H] as soon as it is known."""
    if amount == 0.0:
        return
    ledger.add(CorrectionEntry(amount, _placed(ShapeKind.TWO_INTERVAL_HAT, t_start, 2.0 * H), step_index, EntryKind.SWITCH_PART))


def schedule(
    ledger: BalanceLedger,
    error: BalanceError,
    t_now: float,
    H: float,
    policy: CorrectionPolicy | str,
    *,
    early_switch_done: bool = False,
) -> None:
    """
    Schedule the refeed of a balance error computed at exchange time t_now.

    Args:
        ledger: Ledger of the receiving channel.
        error: The interval's balance error.
        t_now: Exchange time closing the interval.
        H: Macro step.
        policy: Correction policy.
        early_switch_done: split_early only; the switching part was already
            scheduled at the interval start.
    """
    policy = CorrectionPolicy.parse(policy)
    step = error.step_index
    logger.debug(f"step {step}: dE={error.total:.3e} (bc {error.bc_part:.3e}, switch {error.switch_part:.3e})")

    if policy is CorrectionPolicy.NONE:
        return

    if policy is CorrectionPolicy.SPLIT_EARLY:
        if not early_switch_done:
            schedule_switch_part(ledger, error.switch_part, t_now - H, H, step)
        if error.bc_part != 0.0:
            ledger.add(CorrectionEntry(error.bc_part, _placed(ShapeKind.TWO_INTERVAL_HAT, t_now, 2.0 * H), step, EntryKind.BC_PART))
        return

    amount = error.total
    if amount == 0.0:
        return
    kind = {
        CorrectionPolicy.CLASSIC_1: ShapeKind.BOX,
        CorrectionPolicy.SMOOTH_1: ShapeKind.POLY6_HAT,
        CorrectionPolicy.SMOOTH_2: ShapeKind.TWO_INTERVAL_HAT,
        CorrectionPolicy.SMOOTH_4: ShapeKind.TWO_INTERVAL_HAT,
    }[policy]
    ledger.add(CorrectionEntry(amount, _placed(kind, t_now, policy.support_steps * H), step, EntryKind.CLASSIC))


def correction_at(ledger: BalanceLedger, t: float) -> float:
    """Sum of all scheduled corrections at time t."""
    return math.fsum(e.amount * float(e.shape.value(t)) for e in ledger.entries)


def closure_report(ledger: BalanceLedger, t_end: float) -> ClosureReport:
    """
    Compare scheduled and delivered quantities at the end of a run.

    Returns:
        ClosureReport; residual is what supports crossing t_end still owe.
    """
    scheduled = ledger.scheduled
    delivered = ledger.delivered(t_end)
    return ClosureReport(scheduled=scheduled, delivered=delivered, residual=scheduled - delivered)
