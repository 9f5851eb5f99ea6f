import numpy as np
import pytest

from src.balance import (
    BalanceLedger,
    CorrectionEntry,
    CorrectionPolicy,
    EntryKind,
    closure_report,
    correction_at,
    schedule,
    schedule_switch_part,
    split_error,
    step_error,
)
from src.errors import LedgerError
from src.shapes import ShapeKind, place_on_interval, quadrature
from src.signals import ExtrapolantSegment, Interval, integrate_realization, realize


def test_step_error_values():
    assert step_error(1.0, 0.9) == pytest.approx(0.1)
    # u(t) = t on [0, 1] against a zero hold
    assert step_error(0.5, 0.0) == 0.5
    assert step_error(0.3, 0.3) == 0.0


def test_split_error_arithmetic():
    err = split_error(1.0, 0.9, 0.85)
    assert err.total == pytest.approx(0.15)
    assert err.bc_part == pytest.approx(0.1)
    assert err.switch_part == pytest.approx(0.05)
    assert err.total == err.bc_part + err.switch_part


def test_split_error_without_smoothing_has_no_switch_part():
    assert split_error(1.0, 0.8, 0.8).switch_part == 0.0


def test_split_error_of_switch_realization():
    interval = Interval(0.0, 1.0)
    prev = ExtrapolantSegment(interval=Interval(-1.0, 0.0), coefficients=(0.0,))
    base = ExtrapolantSegment(interval=interval, coefficients=(1.0,))
    r = realize(prev, base, True, [], interval)
    err = split_error(1.0, base.integral(0.0, 1.0), integrate_realization(r))
    assert err.switch_part == pytest.approx(0.5, abs=1e-14)
    assert err.bc_part == 0.0


def test_policy_parse_accepts_cli_spellings():
    assert CorrectionPolicy.parse("classic1") is CorrectionPolicy.CLASSIC_1
    assert CorrectionPolicy.parse("split-early") is CorrectionPolicy.SPLIT_EARLY
    assert CorrectionPolicy.parse("smooth_4") is CorrectionPolicy.SMOOTH_4
    with pytest.raises(LedgerError):
        CorrectionPolicy.parse("smooth_3")


def test_schedule_unknown_policy():
    with pytest.raises(LedgerError):
        schedule(BalanceLedger(), split_error(1.0, 0.0, 0.0), 0.0, 0.1, "bogus")


def test_schedule_smooth_1_peak():
    ledger = BalanceLedger()
    schedule(ledger, split_error(0.1, 0.0, 0.0), 0.0, 0.2, CorrectionPolicy.SMOOTH_1)
    assert correction_at(ledger, 0.1) == pytest.approx(1.09375, rel=1e-12)
    entry = ledger.entries[0]
    assert (entry.shape.t_start, entry.shape.t_end) == (0.0, 0.2)


def test_schedule_classic_1_is_constant():
    A, H, t_j = 0.3, 0.25, 1.0
    ledger = BalanceLedger()
    schedule(ledger, split_error(A, 0.0, 0.0), t_j, H, CorrectionPolicy.CLASSIC_1)
    for t in np.linspace(t_j, t_j + H, 11)[:-1]:
        assert correction_at(ledger, t) == pytest.approx(A / H)
    assert correction_at(ledger, t_j + H + 1e-9) == 0.0
    assert correction_at(ledger, t_j - 1e-9) == 0.0


@pytest.mark.parametrize("policy, width", [("smooth_2", 2), ("smooth_4", 4)])
def test_schedule_multi_interval_supports(policy, width):
    ledger = BalanceLedger()
    schedule(ledger, split_error(1.0, 0.0, 0.0), 2.0, 0.5, policy)
    shape = ledger.entries[0].shape
    assert shape.kind is ShapeKind.TWO_INTERVAL_HAT
    assert shape.t_start == 2.0
    assert shape.t_end == pytest.approx(2.0 + width * 0.5)


def test_schedule_none_adds_nothing():
    ledger = BalanceLedger()
    schedule(ledger, split_error(1.0, 0.0, 0.0), 0.0, 0.1, CorrectionPolicy.NONE)
    assert ledger.entries == []


def test_two_consecutive_smooth_2_corrections_sum_to_amount():
    A, H = 0.7, 1.0
    ledger = BalanceLedger()
    schedule(ledger, split_error(A, 0.0, 0.0, step_index=1), 0.0, H, "smooth_2")
    schedule(ledger, split_error(A, 0.0, 0.0, step_index=2), 1.0, H, "smooth_2")
    for t in (1.0, 1.3, 1.5, 1.9, 2.0):
        assert correction_at(ledger, t) == pytest.approx(A, abs=1e-12)


def test_split_early_timing():
    H = 0.1
    ledger = BalanceLedger()
    # switching part known at the interval start t_{j-1} = 0.4
    schedule_switch_part(ledger, 0.02, 0.4, H, 5)
    err = split_error(1.0, 0.9, 0.88, step_index=5)
    schedule(ledger, err, 0.5, H, "split_early", early_switch_done=True)

    switch = [e for e in ledger.entries if e.kind is EntryKind.SWITCH_PART]
    bc = [e for e in ledger.entries if e.kind is EntryKind.BC_PART]
    assert len(switch) == 1 and len(bc) == 1
    assert switch[0].shape.t_start == 0.4
    assert bc[0].shape.t_start == 0.5
    assert bc[0].amount == pytest.approx(0.1)
    assert switch[0].shape.t_end == pytest.approx(bc[0].shape.t_end - H)


def test_split_early_late_view_places_switch_part_one_step_back():
    ledger = BalanceLedger()
    schedule(ledger, split_error(1.0, 0.9, 0.88), 0.5, 0.1, "split_early")
    kinds = {e.kind: e for e in ledger.entries}
    assert kinds[EntryKind.SWITCH_PART].shape.t_start == pytest.approx(0.4)
    assert kinds[EntryKind.BC_PART].shape.t_start == 0.5


def test_correction_at_empty_and_boundary():
    assert correction_at(BalanceLedger(), 0.3) == 0.0
    ledger = BalanceLedger()
    ledger.add(CorrectionEntry(0.5, place_on_interval(ShapeKind.POLY6_HAT, 0.0, 0.2), 0))
    assert correction_at(ledger, 0.2) == 0.0


def test_partition_example_cross_checked_by_quadrature():
    A, H = 0.4, 1.0
    ledger = BalanceLedger()
    for k in range(4):
        schedule(ledger, split_error(A, 0.0, 0.0, k), k * H, H, "smooth_2")
    assert correction_at(ledger, 2.5) == pytest.approx(A, abs=1e-12)
    assert quadrature(lambda t: correction_at(ledger, t), 1.0, 3.0, 400) == pytest.approx(2 * A, abs=1e-10)


def test_refeed_exactness():
    for kind in (ShapeKind.BOX, ShapeKind.POLY6_HAT, ShapeKind.TWO_INTERVAL_HAT):
        ledger = BalanceLedger()
        ledger.add(CorrectionEntry(0.37, place_on_interval(kind, 1.0, 1.8), 0))
        report = closure_report(ledger, 2.0)
        assert report.delivered == pytest.approx(0.37, abs=1e-10)
        assert report.residual == pytest.approx(0.0, abs=1e-10)


def test_closure_report_half_delivered():
    t_end, H = 10.0, 0.2
    ledger = BalanceLedger()
    ledger.add(CorrectionEntry(1.0, place_on_interval(ShapeKind.TWO_INTERVAL_HAT, t_end - H, t_end + H), 49))
    report = closure_report(ledger, t_end)
    assert report.scheduled == 1.0
    assert report.delivered == pytest.approx(0.5, abs=1e-12)
    assert report.residual == pytest.approx(0.5, abs=1e-12)


def test_closure_report_empty():
    report = closure_report(BalanceLedger(), 1.0)
    assert (report.scheduled, report.delivered, report.residual) == (0.0, 0.0, 0.0)


def test_ledger_rejects_non_finite_amount():
    with pytest.raises(LedgerError):
        BalanceLedger().add(CorrectionEntry(float("inf"), place_on_interval(ShapeKind.BOX, 0.0, 1.0), 0))


def test_active_entries():
    ledger = BalanceLedger()
    schedule(ledger, split_error(1.0, 0.0, 0.0, 1), 0.2, 0.2, "smooth_4")
    assert len(ledger.active(0.8, 1.0)) == 1
    assert ledger.active(1.0, 1.2) == []
    assert ledger.active(0.0, 0.2) == []


def test_forward_sweep_retires_finished_entries():
    H = 0.125
    ledger = BalanceLedger()
    for j in range(1, 51):
        schedule(ledger, split_error(1.0, 0.0, 0.0, j), j * H, H, "smooth_2")
        expected = [j - 1, j] if j > 1 else [1]
        assert [e.source_step for e in ledger.active(j * H, (j + 1) * H)] == expected
        assert len(ledger._open) == len(expected)
    assert len(ledger.entries) == 50
    # a query behind the sweep still sees retired entries
    assert [e.source_step for e in ledger.active(12 * H, 13 * H)] == [11, 12]
    assert ledger.scheduled == pytest.approx(50.0)


@pytest.mark.parametrize("policy", ["smooth_1", "smooth_2", "smooth_4"])
def test_smooth_corrections_are_c2_at_exchange_times(policy, rng):
    H = 0.2
    ledger = BalanceLedger()
    for j in range(1, 8):
        schedule(ledger, split_error(rng.normal(), 0.0, 0.0, j), j * H, H, policy)
    for j in range(2, 8):
        t = j * H
        active = ledger.entries
        left = sum(e.amount * e.shape.derivative(t - 1e-12, 1) for e in active)
        right = sum(e.amount * e.shape.derivative(t + 1e-12, 1) for e in active)
        assert left == pytest.approx(right, abs=1e-6)
        left2 = sum(e.amount * e.shape.derivative(t - 1e-12, 2) for e in active)
        right2 = sum(e.amount * e.shape.derivative(t + 1e-12, 2) for e in active)
        assert left2 == pytest.approx(right2, abs=1e-4)


def test_classic_corrections_jump_at_exchange_times():
    H = 0.2
    ledger = BalanceLedger()
    schedule(ledger, split_error(0.1, 0.0, 0.0, 1), H, H, "classic_1")
    schedule(ledger, split_error(0.3, 0.0, 0.0, 2), 2 * H, H, "classic_1")
    jump = correction_at(ledger, 2 * H) - correction_at(ledger, 2 * H - 1e-9)
    assert jump == pytest.approx((0.3 - 0.1) / H)


def test_switch_share():
    ledger = BalanceLedger()
    schedule(ledger, split_error(1.0, 0.7, 0.6), 1.0, 0.1, "split_early")
    assert ledger.switch_share() == pytest.approx(0.1 / 0.4)
