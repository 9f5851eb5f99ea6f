"""
Reference Run - Monolithic ground truth on the co-simulation grids.
"""
import logging

import numpy as np
from scipy.integrate import simpson

from src.master.cosim_config import CosimConfig
from src.master.record import TrajectoryRecord
from src.models import BenchmarkModel, get_model

logger = logging.getLogger(__name__)


def reference_run(config: CosimConfig, model: BenchmarkModel | None = None) -> TrajectoryRecord:
    """
    Evaluate the analytic reference on the exchange and dense grids of a run.

    Args:
        config: Run configuration (only model, grids and initial state matter).
        model: Optional prebuilt model.

    Returns:
        TrajectoryRecord with exact inputs, zero balance errors and E = E_ref.
    """
    model = model or get_model(config.model, config.params, list(config.initial) if config.initial else None)
    spec = model.split()
    x0 = model.initial_state()
    N, dense = config.n_steps, config.dense

    t = np.array([config.grid_time(j) for j in range(N + 1)])
    pieces = [np.linspace(t[j], t[j + 1], dense + 1)[(0 if j == 0 else 1):] for j in range(N)]
    dense_t = np.concatenate(pieces)

    def evaluate(times: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        xs = np.array([model.analytic_reference(tt - config.t0, x0) for tt in times])
        ys = np.array([spec.outputs(tt, x) for tt, x in zip(times, xs)])
        return xs, ys

    states, outputs = evaluate(t)
    dense_states, dense_outputs = evaluate(dense_t)
    energy = np.array([model.energy(x) for x in states])

    # inputs are exactly the senders' outputs
    per_step = dense + 1
    integrals = np.array([
        simpson(dense_outputs[j * dense: j * dense + per_step], x=dense_t[j * dense: j * dense + per_step], axis=0)
        for j in range(N)
    ])

    logger.info(f"Reference run: {config.model} steps={N}")
    return TrajectoryRecord(
        t=t,
        states=states,
        outputs=outputs,
        inputs_used=outputs.copy(),
        dE=np.zeros_like(outputs),
        energy=energy,
        energy_ref=energy.copy(),
        dense_t=dense_t,
        dense_states=dense_states,
        dense_inputs=dense_outputs,
        dense_corrections=np.zeros_like(dense_outputs),
        true_integrals=integrals,
        used_integrals=integrals.copy(),
        meta={"config": config.model_dump(mode="json"), "model": model.describe(), "reference": True},
    )
