"""
Trajectory Record - Exchange-time and dense samples of a co-simulation run.
Serialized as two CSV tables with 17 significant digits.
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from scipy.integrate import cumulative_trapezoid

from src.balance import ClosureReport

FLOAT_FORMAT = "%.17g"


@dataclass
class TrajectoryRecord:
    """
    Everything a run produced.

    Exchange rows sit exactly at t_j; dE in row j is the balance error of
    [t_{j-1}, t_j] (row 0 is zero).
    """

    t: np.ndarray
    states: np.ndarray
    outputs: np.ndarray
    inputs_used: np.ndarray
    dE: np.ndarray
    energy: np.ndarray
    energy_ref: np.ndarray
    dense_t: np.ndarray
    dense_states: np.ndarray
    dense_inputs: np.ndarray
    dense_corrections: np.ndarray
    true_integrals: np.ndarray | None = None
    used_integrals: np.ndarray | None = None
    closure: list[ClosureReport] = field(default_factory=list)
    switch_share: list[float] = field(default_factory=list)
    realizations: list[list[Any]] = field(default_factory=list)
    meta: dict[str, Any] = field(default_factory=dict)

    @property
    def n_state(self) -> int:
        return self.states.shape[1]

    @property
    def n_channels(self) -> int:
        return self.outputs.shape[1]

    def exchange_header(self) -> list[str]:
        m = self.n_channels
        return (
            ["t"]
            + [f"x{i}" for i in range(self.n_state)]
            + [f"y{k}" for k in range(m)]
            + [f"u_used{k}" for k in range(m)]
            + [f"dE{k}" for k in range(m)]
            + ["E", "E_ref"]
        )

    def dense_header(self) -> list[str]:
        m = self.n_channels
        return ["t"] + [f"x{i}" for i in range(self.n_state)] + [f"u_real{k}" for k in range(m)] + [f"corr{k}" for k in range(m)]

    def exchange_table(self) -> np.ndarray:
        return np.column_stack([self.t, self.states, self.outputs, self.inputs_used, self.dE, self.energy, self.energy_ref])

    def dense_table(self) -> np.ndarray:
        return np.column_stack([self.dense_t, self.dense_states, self.dense_inputs, self.dense_corrections])

    def energy_ratio(self) -> np.ndarray:
        return self.energy / self.energy[0]

    def state_error(self, other: "TrajectoryRecord") -> np.ndarray:
        """Euclidean state error against another record at each exchange time."""
        if self.t.shape != other.t.shape or not np.allclose(self.t, other.t, rtol=0.0, atol=1e-12):
            raise ValueError("Records have different exchange grids")
        return np.linalg.norm(self.states - other.states, axis=1)

    def max_error(self, other: "TrajectoryRecord") -> float:
        return float(np.max(self.state_error(other)))

    def velocity_integrals(self, index: int) -> tuple[np.ndarray, np.ndarray]:
        """
        Integrate a velocity state twice: from exchange-time samples only and
        from the dense trace, both reported at the exchange times.
        """
        coarse = cumulative_trapezoid(self.states[:, index], self.t, initial=0.0)
        fine_all = cumulative_trapezoid(self.dense_states[:, index], self.dense_t, initial=0.0)
        rows = np.searchsorted(self.dense_t, self.t - 1e-12)
        return coarse, fine_all[np.clip(rows, 0, len(fine_all) - 1)]


def dense_path(path: Path | str) -> Path:
    """Sibling path of the dense table: run.csv -> run.dense.csv."""
    path = Path(path)
    stem = path.name[:-4] if path.name.endswith(".csv") else path.name
    return path.with_name(f"{stem}.dense.csv")


def write_record_csv(record: TrajectoryRecord, path: Path | str) -> tuple[Path, Path]:
    """
    Write the exchange table to `path` and the dense table next to it.

    Returns:
        Both file paths.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    dense = dense_path(path)
    np.savetxt(path, record.exchange_table(), fmt=FLOAT_FORMAT, delimiter=",", header=",".join(record.exchange_header()), comments="")
    np.savetxt(dense, record.dense_table(), fmt=FLOAT_FORMAT, delimiter=",", header=",".join(record.dense_header()), comments="")
    return path, dense


def _columns(header: list[str], prefix: str) -> list[int]:
    return [i for i, name in enumerate(header) if name.startswith(prefix) and name[len(prefix):].isdigit()]


def read_record_csv(path: Path | str) -> TrajectoryRecord:
    """Parse the two tables written by write_record_csv."""
    path = Path(path)
    dense = dense_path(path)

    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().strip().split(",")
    with open(dense, "r", encoding="utf-8") as f:
        dense_header = f.readline().strip().split(",")

    table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    dense_table = np.loadtxt(dense, delimiter=",", skiprows=1, ndmin=2)

    def cols(tab, head, prefix):
        return tab[:, _columns(head, prefix)]

    return TrajectoryRecord(
        t=table[:, header.index("t")],
        states=cols(table, header, "x"),
        outputs=cols(table, header, "y"),
        inputs_used=cols(table, header, "u_used"),
        dE=cols(table, header, "dE"),
        energy=table[:, header.index("E")],
        energy_ref=table[:, header.index("E_ref")],
        dense_t=dense_table[:, dense_header.index("t")],
        dense_states=cols(dense_table, dense_header, "x"),
        dense_inputs=cols(dense_table, dense_header, "u_real"),
        dense_corrections=cols(dense_table, dense_header, "corr"),
    )
