import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.integrate import simpson

from src.balance import CorrectionPolicy
from src.errors import NumericalFailure
from src.master import (
    CosimConfig,
    CosimulationMaster,
    MicroIntegrator,
    Subsystem,
    micro_advance,
    read_record_csv,
    reference_run,
    run_cosimulation,
    write_record_csv,
)
from src.models import DoubleSpringMass, DoubleSpringMassParams, MovingGround, SpringMass, SpringMassParams, SubsystemSpec


def _config(**kwargs) -> CosimConfig:
    base = dict(model="spring-mass", H=0.2, t_end=2.0, ext_order=0, smoothing=False, policy="none",
                method="RK45", abs_tol=1e-10, rel_tol=1e-10, max_step=None, dense=20, workers=1)
    base.update(kwargs)
    return CosimConfig(**base)


# =============================================================================
# Micro integration
# =============================================================================

def _scalar_sub(rhs, output=lambda t, x: np.array([x[0]]), n_in=0) -> Subsystem:
    return Subsystem(SubsystemSpec("probe", (0.0,), rhs, output, n_in, 1))


def test_micro_advance_constant_state(tight_micro):
    sub = _scalar_sub(lambda t, x, u: np.zeros(1))
    sub.state = np.array([0.7])
    micro_advance(sub, [], 0.0, 0.2, tight_micro)
    assert sub.state[0] == 0.7


def test_micro_advance_unit_rate(tight_micro):
    sub = _scalar_sub(lambda t, x, u: np.ones(1))
    micro_advance(sub, [], 0.0, 0.2, tight_micro)
    assert sub.state[0] == pytest.approx(0.2, abs=1e-12)


def test_mass_under_constant_force(tight_micro):
    spec = SpringMass(SpringMassParams(m=1.0), initial=[0.0, 0.5]).split()
    mass = Subsystem(spec.subsystems[1])
    H, F = 0.2, 3.0
    result = mass.advance([lambda t: F], 0.0, H, tight_micro, dense=10)
    assert mass.state[0] == pytest.approx(0.5 + F * H, abs=1e-10)
    assert mass.accumulators[0] == pytest.approx(0.5 * H + F * H**2 / 2, abs=1e-10)
    assert result.t.shape == (11,)
    assert result.states.shape == (11, 1)


def test_accumulators_restart_every_interval(tight_micro):
    sub = _scalar_sub(lambda t, x, u: np.zeros(1), output=lambda t, x: np.array([1.0]))
    sub.advance([], 0.0, 0.2, tight_micro)
    sub.advance([], 0.2, 0.4, tight_micro)
    assert sub.accumulators[0] == pytest.approx(0.2, abs=1e-12)


def test_micro_advance_rejects_empty_interval(tight_micro):
    with pytest.raises(ValueError):
        micro_advance(_scalar_sub(lambda t, x, u: np.zeros(1)), [], 0.2, 0.2, tight_micro)


def test_subsystem_checks_input_count(tight_micro):
    sub = _scalar_sub(lambda t, x, u: u, n_in=1)
    with pytest.raises(ValueError, match="expects 1 inputs"):
        sub.advance([], 0.0, 0.1, tight_micro)


def test_blow_up_reports_time(tight_micro):
    sub = _scalar_sub(lambda t, x, u: x * x)
    sub.state = np.array([1.0])
    with pytest.raises(NumericalFailure) as excinfo:
        micro_advance(sub, [], 0.0, 2.0, tight_micro)
    assert excinfo.value.t == pytest.approx(1.0, abs=0.05)


# =============================================================================
# Configuration
# =============================================================================

def test_config_grid():
    cfg = _config(H=0.1, t_end=10.0)
    assert cfg.n_steps == 100
    assert cfg.grid_time(37) == 37 * 0.1
    assert cfg.micro_integrator() == MicroIntegrator("RK45", 1e-10, 1e-10, None)


def test_config_rejects_non_dividing_step():
    with pytest.raises(ValidationError):
        _config(H=0.3, t_end=1.0)
    with pytest.raises(ValidationError):
        _config(t_end=0.0)
    with pytest.raises(ValidationError):
        _config(ext_order=2)
    with pytest.raises(ValidationError):
        _config(unknown_field=1)


def test_config_policy_aliases():
    assert _config(policy="split-early").policy is CorrectionPolicy.SPLIT_EARLY
    assert _config(policy="classic1").policy is CorrectionPolicy.CLASSIC_1
    with pytest.raises(ValidationError):
        _config(policy="smooth_3")


def test_config_warns_on_wide_support(caplog):
    with caplog.at_level("WARNING"):
        _config(H=0.2, t_end=0.6, policy="smooth_4")
    assert "not shorter than the horizon" in caplog.text


def test_config_with_updates_revalidates():
    cfg = _config()
    assert cfg.with_updates(H=0.1).n_steps == 20
    with pytest.raises(ValidationError):
        cfg.with_updates(H=0.15)


# =============================================================================
# Runs
# =============================================================================

def test_record_grids():
    record = run_cosimulation(_config())
    assert record.t.shape == (11,)
    assert record.t[-1] == 2.0
    assert record.dense_t.shape == (10 * 20 + 1,)
    np.testing.assert_allclose(np.diff(record.dense_t), 0.01, atol=1e-12)
    assert np.all(record.dE[0] == 0.0)
    assert record.exchange_table().shape == (11, len(record.exchange_header()))
    assert record.dense_table().shape == (201, len(record.dense_header()))


def test_order0_without_correction_is_explicit_euler():
    record = run_cosimulation(_config(H=0.2, t_end=10.0))
    energy = record.energy
    assert energy[-1] > energy[0]
    assert np.all(np.diff(energy) > 0.0)
    # x_{j+1} = x_j + H A x_j grows the energy by 1 + H^2 per step
    np.testing.assert_allclose(energy, 0.5 * 1.04 ** np.arange(51), rtol=1e-8)


def test_classic_correction_beats_plain_hold():
    plain = run_cosimulation(_config(H=0.1, t_end=10.0))
    corrected = run_cosimulation(_config(H=0.1, t_end=10.0, policy="classic_1"))
    exact = np.cos(corrected.t)
    err_plain = np.max(np.abs(plain.states[:, 0] - exact))
    err_corrected = np.max(np.abs(corrected.states[:, 0] - exact))
    assert err_corrected < 0.25
    assert err_corrected < err_plain
    assert 0.95 <= corrected.energy_ratio()[-1] <= 1.05


def test_decoupled_subsystems_match_reference():
    params = {"c2": 0.0, "d2": 0.0}
    cfg = _config(model="double-spring-mass", params=params, abs_tol=1e-12, rel_tol=1e-12)
    record = run_cosimulation(cfg)
    reference = reference_run(cfg)
    assert record.max_error(reference) < 1e-9


def test_zero_error_fixed_point():
    # c = 0: spring force is identically zero and the velocity is constant
    cfg = _config(params={"c": 0.0}, initial=(0.0, 1.0), policy="classic_1")
    record = run_cosimulation(cfg)
    assert np.max(np.abs(record.dE)) < 1e-14
    assert record.max_error(reference_run(cfg)) < 1e-9


def test_quadrature_states_agree_with_dense_trace():
    cfg = _config(ext_order=1, smoothing=True, policy="smooth_2")
    master = CosimulationMaster(cfg)
    record = master.run()
    spec = master.spec
    outputs = np.array([spec.outputs(t, x) for t, x in zip(record.dense_t, record.dense_states)])
    d = cfg.dense
    for j in range(cfg.n_steps):
        window = slice(j * d, j * d + d + 1)
        np.testing.assert_allclose(simpson(outputs[window], x=record.dense_t[window], axis=0), record.true_integrals[j], atol=1e-8)


@pytest.mark.parametrize("policy", ["classic_1", "smooth_1", "smooth_2", "smooth_4", "split_early"])
@pytest.mark.parametrize("smoothing", [False, True])
def test_balance_closes_end_to_end(policy, smoothing):
    record = run_cosimulation(_config(ext_order=1, smoothing=smoothing, policy=policy))
    for k, report in enumerate(record.closure):
        missing = math.fsum(record.true_integrals[:, k]) - math.fsum(record.used_integrals[:, k])
        assert missing == pytest.approx(report.scheduled, abs=1e-12)
        assert missing - report.delivered == pytest.approx(report.residual, abs=1e-8)


@pytest.mark.parametrize("model", ["spring-mass", "double-spring-mass", "moving-ground"])
@pytest.mark.parametrize("policy", ["classic_1", "smooth_2", "split_early"])
def test_balance_closes_on_every_benchmark(model, policy):
    record = run_cosimulation(_config(model=model, H=0.1, t_end=1.0, ext_order=1, smoothing=True, policy=policy,
                                      abs_tol=1e-8, rel_tol=1e-8, dense=4))
    assert record.closure
    for k, report in enumerate(record.closure):
        missing = math.fsum(record.true_integrals[:, k]) - math.fsum(record.used_integrals[:, k])
        assert missing == pytest.approx(report.scheduled, abs=1e-10)
        assert missing - report.delivered == pytest.approx(report.residual, abs=1e-8)


def test_no_policy_schedules_nothing():
    record = run_cosimulation(_config(ext_order=1, smoothing=True))
    assert all(report.scheduled == 0.0 for report in record.closure)
    assert np.any(record.dE != 0.0)


def test_realizations_use_only_past_samples():
    record = run_cosimulation(_config(ext_order=1))
    H = 0.2
    for j, step in enumerate(record.realizations):
        for k, r in enumerate(step):
            assert r.interval.t_start == pytest.approx(record.t[j])
            assert r.base.value(record.t[j]) == pytest.approx(record.outputs[j, k], abs=1e-14)
            if j >= 1:
                assert r.base.slope == pytest.approx((record.outputs[j, k] - record.outputs[j - 1, k]) / H, rel=1e-12, abs=1e-12)


def test_smoothed_input_is_c2_at_exchange_times():
    record = run_cosimulation(_config(ext_order=1, smoothing=True, policy="smooth_2"))
    h = 1e-5
    for k in range(record.n_channels):
        scale = max(1.0, float(np.max(np.abs(record.dense_inputs[:, k]))))
        for j in range(1, len(record.realizations)):
            left, right = record.realizations[j - 1][k], record.realizations[j][k]
            t = record.t[j]
            assert right.value(t) == pytest.approx(left.value(t), abs=1e-12 * scale)
            for order in (1, 2):
                assert right.derivative(t, order) == pytest.approx(left.derivative(t, order), abs=1e-8 * scale)
            slope_fd = (right.value(t + h) - left.value(t - h)) / (2 * h)
            assert slope_fd == pytest.approx(right.derivative(t, 1), abs=1e-6 * scale)
            curvature_fd = (right.value(t + h) - 2 * right.value(t) + left.value(t - h)) / h**2
            assert curvature_fd == pytest.approx(right.derivative(t, 2), abs=1e-6 * scale / h)


def test_unsmoothed_hold_jumps():
    record = run_cosimulation(_config())
    jumps = [abs(record.realizations[j][0].value(t) - record.realizations[j - 1][0].value(t))
             for j, t in enumerate(record.t[1:-1], start=1)]
    assert max(jumps) > 1e-3


def test_inputs_used_column():
    record = run_cosimulation(_config(ext_order=0))
    np.testing.assert_array_equal(record.inputs_used[:-1], record.outputs[:-1])
    # last row is the left limit of the final interval's hold
    np.testing.assert_array_equal(record.inputs_used[-1], record.outputs[-2])


def test_workers_do_not_change_results():
    serial = run_cosimulation(_config(model="double-spring-mass", ext_order=1, policy="smooth_2"))
    parallel = run_cosimulation(_config(model="double-spring-mass", ext_order=1, policy="smooth_2", workers=2))
    np.testing.assert_array_equal(serial.exchange_table(), parallel.exchange_table())
    np.testing.assert_array_equal(serial.dense_table(), parallel.dense_table())


def test_identical_runs_write_identical_files(tmp_path):
    cfg = _config(ext_order=1, smoothing=True, policy="split_early")
    paths = []
    for name in ("a", "b"):
        paths.append(write_record_csv(run_cosimulation(cfg), tmp_path / name / "run.csv"))
    for first, second in zip(*paths):
        assert first.read_bytes() == second.read_bytes()


def test_csv_round_trip(tmp_path):
    record = run_cosimulation(_config(model="double-spring-mass", ext_order=1, policy="smooth_1"))
    exchange, dense = write_record_csv(record, tmp_path / "run.csv")
    assert dense.name == "run.dense.csv"
    assert exchange.read_text().splitlines()[0].startswith("t,x0,x1,x2,x3,y0")

    parsed = read_record_csv(exchange)
    for name in ("t", "states", "outputs", "inputs_used", "dE", "energy", "energy_ref",
                 "dense_t", "dense_states", "dense_inputs", "dense_corrections"):
        np.testing.assert_array_equal(getattr(parsed, name), getattr(record, name))


def test_progress_callback_receives_messages():
    messages = []
    run_cosimulation(_config(t_end=0.4), progress_callback=messages.append)
    assert messages[0].startswith("Co-simulation start")
    assert messages[-1].startswith("Co-simulation done")


def test_moving_ground_run_exchanges_displacement(fast_micro):
    cfg = _config(model="moving-ground", H=0.1, t_end=0.5, abs_tol=fast_micro.abs_tol, rel_tol=fast_micro.rel_tol)
    record = run_cosimulation(cfg)
    assert record.n_channels == 1
    np.testing.assert_allclose(record.outputs[:, 0], MovingGround().ground(record.t), atol=1e-6)


# =============================================================================
# Reference
# =============================================================================

def test_reference_energy_is_constant():
    record = reference_run(_config(t_end=10.0))
    np.testing.assert_allclose(record.energy, 0.5, atol=1e-12)
    np.testing.assert_allclose(record.energy_ratio(), 1.0, atol=1e-8)


def test_reference_against_itself_is_zero():
    cfg = _config()
    first, second = reference_run(cfg), reference_run(cfg)
    assert np.all(first.state_error(second) == 0.0)


def test_reference_shares_grids_with_cosim():
    cfg = _config(model="double-spring-mass")
    record, reference = run_cosimulation(cfg), reference_run(cfg)
    np.testing.assert_array_equal(record.t, reference.t)
    np.testing.assert_array_equal(record.dense_t, reference.dense_t)
    assert reference.exchange_header() == record.exchange_header()


def test_moving_ground_reference_tracks_ground():
    model = MovingGround()
    record = reference_run(_config(model="moving-ground", H=0.1, t_end=4.0), model)
    ground = model.ground(record.dense_t) + model.params.h0
    assert np.max(np.abs(record.dense_states[:, 2] - ground)) < 1e-2 * model.params.x_t0


def test_state_error_requires_same_grid():
    with pytest.raises(ValueError):
        reference_run(_config(H=0.2)).state_error(reference_run(_config(H=0.1)))


def test_velocity_integrals_agree_for_smooth_reference():
    record = reference_run(_config(t_end=4.0))
    coarse, fine = record.velocity_integrals(1)
    exact = np.cos(record.t) - 1.0
    assert np.max(np.abs(fine - exact)) < 1e-4
    assert np.max(np.abs(coarse - exact)) < 2e-2


def test_decoupled_double_uses_model_instance():
    model = DoubleSpringMass(DoubleSpringMassParams(c2=0.0, d2=0.0))
    record = run_cosimulation(_config(model="double-spring-mass"), model)
    assert record.meta["model"]["c2"] == 0.0
