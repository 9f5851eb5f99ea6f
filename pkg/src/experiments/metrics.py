"""
Metrics - Scalar summaries of co-simulation traces.
"""
import numpy as np

from src.config import settings


def oscillation_metric(
    t: np.ndarray,
    v_cosim: np.ndarray,
    v_ref: np.ndarray,
    window: float | None = None,
) -> float:
    """
    RMS deviation of a receiver velocity from its reference on the late part
    of the horizon.

    Args:
        t: Uniform dense time grid.
        v_cosim: Co-simulated velocity on t.
        v_ref: Reference velocity on t.
        window: Fraction of the horizon skipped before measuring
            (default from settings, 0.5 = second half).

    Returns:
        Root mean square of v_cosim - v_ref over the measured part.
    """
    t = np.asarray(t, dtype=float)
    v_cosim = np.asarray(v_cosim, dtype=float)
    v_ref = np.asarray(v_ref, dtype=float)
    if window is None:
        window = float(settings()["studies"]["oscillation_window"])

    if t.ndim != 1 or v_cosim.shape != t.shape or v_ref.shape != t.shape:
        raise ValueError(f"Trace shapes do not match the grid: t {t.shape}, cosim {v_cosim.shape}, ref {v_ref.shape}")
    if t.size < 2:
        raise ValueError("Oscillation metric needs at least two samples")
    if not 0.0 <= window < 1.0:
        raise ValueError(f"Window start must be a fraction in [0, 1), got {window}")
    steps = np.diff(t)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
        raise ValueError("Oscillation metric needs a uniform time grid")

    start = t[0] + window * (t[-1] - t[0])
    mask = t >= start - 1e-12
    deviation = v_cosim[mask] - v_ref[mask]
    return float(np.sqrt(np.mean(deviation * deviation)))


def eoc(err_coarse: float, err_fine: float) -> float:
    """Experimental order from one halving of H."""
    if not (err_coarse > 0 and err_fine > 0) or not (np.isfinite(err_coarse) and np.isfinite(err_fine)):
        return float("nan")
    return float(np.log2(err_coarse / err_fine))
