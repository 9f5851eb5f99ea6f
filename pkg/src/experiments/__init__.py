# Studies, metrics and the command line
from src.experiments.metrics import eoc, oscillation_metric
from src.experiments.studies import (
    EnergyTrace,
    EocRow,
    OscillationRow,
    StudyKind,
    StudyRunner,
    StudySpec,
    classify_energy,
    convergence_study,
    energy_drift_study,
    format_eoc_table,
    oscillation_study,
)

__all__ = [
    "EnergyTrace",
    "EocRow",
    "OscillationRow",
    "StudyKind",
    "StudyRunner",
    "StudySpec",
    "classify_energy",
    "convergence_study",
    "energy_drift_study",
    "eoc",
    "format_eoc_table",
    "oscillation_metric",
    "oscillation_study",
]
