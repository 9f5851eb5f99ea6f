"""
Studies - Sweeps over co-simulation configurations.
Convergence (EOC) tables, energy-drift classification and oscillation
metrics, each point compared against the monolithic reference.
"""
import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.config import settings
from src.errors import NumericalFailure
from src.experiments.metrics import eoc, oscillation_metric
from src.master import CosimConfig, TrajectoryRecord, reference_run, run_cosimulation
from src.models import MODELS, get_model

logger = logging.getLogger(__name__)

HALVING_TOL = 1e-9


class StudyKind(str, Enum):
    CONVERGENCE = "convergence"
    ENERGY_DRIFT = "energy_drift"
    OSCILLATION = "oscillation"
    SINGLE_RUN = "single_run"


class StudySpec(BaseModel):
    """A study: one base configuration and a cartesian sweep over some of its fields."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: StudyKind
    base: CosimConfig = Field(default_factory=CosimConfig)
    sweep: list[tuple[str, list[Any]]] = Field(default_factory=list)
    workers: int = Field(default=1, ge=1)

    @field_validator("sweep")
    @classmethod
    def _known_fields(cls, sweep):
        for name, values in sweep:
            if name not in CosimConfig.model_fields:
                raise ValueError(f"Unknown sweep field {name!r}")
            if not values:
                raise ValueError(f"Sweep over {name!r} has no values")
        return sweep

    @model_validator(mode="after")
    def _convergence_sweeps_h(self) -> "StudySpec":
        if self.kind is StudyKind.CONVERGENCE and any(name != "H" for name, _ in self.sweep):
            raise ValueError("A convergence study sweeps H only")
        return self

    def points(self) -> list[CosimConfig]:
        """Configurations of the sweep, in flag order (last field varies fastest)."""
        if not self.sweep:
            return [self.base]
        names = [name for name, _ in self.sweep]
        return [
            self.base.with_updates(**dict(zip(names, combo)))
            for combo in itertools.product(*(values for _, values in self.sweep))
        ]


# =============================================================================
# Result rows
# =============================================================================

@dataclass
class EocRow:
    """One H of a convergence table."""

    H: float
    err: float
    eoc: float = float("nan")
    floor_limited: bool = False
    note: str = ""


@dataclass
class EnergyTrace:
    """Energy at exchange times for one configuration."""

    label: str
    t: np.ndarray
    energy: np.ndarray
    classification: str
    note: str = ""

    @property
    def ratio(self) -> np.ndarray:
        return self.energy / self.energy[0] if self.energy.size else self.energy

    @property
    def final_ratio(self) -> float:
        return float(self.ratio[-1]) if self.energy.size else float("nan")

    def table(self) -> np.ndarray:
        """Columns t_j, E(t_j), E/E0."""
        return np.column_stack([self.t, self.energy, self.ratio])


@dataclass
class OscillationRow:
    label: str
    metric: float
    config: CosimConfig
    note: str = ""


@dataclass
class PointResult:
    config: CosimConfig
    record: TrajectoryRecord | None = None
    reference: TrajectoryRecord | None = None
    error: str = ""


def classify_energy(ratio: float, bands: dict[str, float] | None = None) -> str:
    """
    Classify E(t_end)/E0 as decaying, bounded or growing.

    Args:
        ratio: Final energy ratio.
        bands: {"growing": upper, "decaying": lower}; defaults from settings.
    """
    bands = bands or settings()["studies"]["energy_bands"]
    if not math.isfinite(ratio) or ratio > float(bands["growing"]):
        return "growing"
    if ratio < float(bands["decaying"]):
        return "decaying"
    return "bounded"


# =============================================================================
# Runner
# =============================================================================

class StudyRunner:
    """
    Runs the points of a StudySpec and assembles rows in sweep order.
    """

    def __init__(self, spec: StudySpec, progress_callback: Callable[[str], None] | None = None):
        self.spec = spec
        self.progress_callback = progress_callback

    def _log(self, msg: str) -> None:
        if self.progress_callback:
            self.progress_callback(msg)
        logger.info(msg)

    def _run_point(self, config: CosimConfig, with_reference: bool) -> PointResult:
        model = get_model(config.model, config.params, list(config.initial) if config.initial else None)
        try:
            record = run_cosimulation(config, model)
        except NumericalFailure as exc:
            self._log(f"{config.label()}: failed ({exc})")
            return PointResult(config, error=str(exc))
        reference = reference_run(config, model) if with_reference else None
        self._log(f"{config.label()}: done")
        return PointResult(config, record, reference)

    def run_points(self, with_reference: bool = True) -> list[PointResult]:
        points = self.spec.points()
        self._log(f"Study {self.spec.kind.value}: {len(points)} point(s)")
        if self.spec.workers > 1 and len(points) > 1:
            with ThreadPoolExecutor(max_workers=self.spec.workers) as pool:
                return list(pool.map(lambda c: self._run_point(c, with_reference), points))
        return [self._run_point(c, with_reference) for c in points]

    def convergence(self) -> list[EocRow]:
        floor_factor = float(settings()["studies"]["floor_factor"])
        rows: list[EocRow] = []
        for result in self.run_points():
            cfg = result.config
            if result.record is None:
                rows.append(EocRow(H=cfg.H, err=float("nan"), note=result.error))
                continue
            err = result.record.max_error(result.reference)
            note = "" if math.isfinite(err) else "non-finite error"
            floor = floor_factor * max(cfg.abs_tol, cfg.rel_tol)
            rows.append(EocRow(H=cfg.H, err=err, floor_limited=err < floor, note=note))

        for prev, row in zip(rows, rows[1:]):
            if not math.isclose(prev.H, 2.0 * row.H, rel_tol=HALVING_TOL):
                row.note = row.note or "not a halving of the previous H"
                continue
            row.eoc = eoc(prev.err, row.err)
            row.floor_limited = row.floor_limited or prev.floor_limited
            if math.isfinite(prev.err) and row.err > 1.1 * prev.err and not row.floor_limited:
                row.note = row.note or "error grew under halving"
                logger.warning(f"H={row.H:g}: error grew from {prev.err:.3e} to {row.err:.3e} under halving")
        return rows

    def energy_drift(self) -> list[EnergyTrace]:
        traces = []
        for result in self.run_points(with_reference=False):
            label = result.config.label()
            if result.record is None:
                # a blown-up run is the extreme of growth
                traces.append(EnergyTrace(label, np.zeros(0), np.zeros(0), "growing", result.error))
                continue
            rec = result.record
            ratio = float(rec.energy[-1] / rec.energy[0]) if rec.energy[0] else float("nan")
            traces.append(EnergyTrace(label, rec.t, rec.energy, classify_energy(ratio)))
        return traces

    def oscillation(self) -> list[OscillationRow]:
        rows = []
        for result in self.run_points():
            cfg = result.config
            if result.record is None:
                rows.append(OscillationRow(cfg.label(), float("nan"), cfg, result.error))
                continue
            index = MODELS[cfg.model].receiver_velocity_index
            metric = oscillation_metric(
                result.record.dense_t,
                result.record.dense_states[:, index],
                result.reference.dense_states[:, index],
            )
            rows.append(OscillationRow(cfg.label(), metric, cfg))
        return rows

    def single_runs(self) -> list[TrajectoryRecord]:
        records = []
        for result in self.run_points(with_reference=False):
            if result.record is None:
                raise NumericalFailure(result.error)
            records.append(result.record)
        return records

    def run(self):
        return {
            StudyKind.CONVERGENCE: self.convergence,
            StudyKind.ENERGY_DRIFT: self.energy_drift,
            StudyKind.OSCILLATION: self.oscillation,
            StudyKind.SINGLE_RUN: self.single_runs,
        }[self.spec.kind]()


# =============================================================================
# Convenience functions
# =============================================================================

def convergence_study(spec: StudySpec, progress_callback: Callable[[str], None] | None = None) -> list[EocRow]:
    """
    Max-norm state error against the reference for each H, with EOC from
    consecutive halvings.

    Failed points stay in the table with err = NaN and the failure text.
    """
    return StudyRunner(spec, progress_callback).convergence()


def energy_drift_study(spec: StudySpec, progress_callback: Callable[[str], None] | None = None) -> list[EnergyTrace]:
    """Energy traces and their decaying/bounded/growing classification."""
    return StudyRunner(spec, progress_callback).energy_drift()


def oscillation_study(spec: StudySpec, progress_callback: Callable[[str], None] | None = None) -> list[OscillationRow]:
    """Receiver-velocity oscillation metric per configuration."""
    return StudyRunner(spec, progress_callback).oscillation()


def format_eoc_table(rows: list[EocRow]) -> str:
    lines = [f"{'H':>10} {'err':>12} {'eoc':>7}  note"]
    for row in rows:
        eoc_text = "-" if math.isnan(row.eoc) else f"{row.eoc:.3f}"
        note = "floor-limited" if row.floor_limited and not row.note else row.note
        lines.append(f"{row.H:>10.6g} {row.err:>12.4e} {eoc_text:>7}  {note}".rstrip())
    return "\n".join(lines)


if __name__ == "__main__":
    # Quick test
    base = CosimConfig(model="spring-mass", t_end=10.0, ext_order=0)
    spec = StudySpec(kind=StudyKind.CONVERGENCE, base=base, sweep=[("H", [0.2, 0.1, 0.05, 0.025])])
    print(format_eoc_table(convergence_study(spec, print)))
