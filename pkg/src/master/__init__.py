# Co-simulation master
from src.master.cosim import CosimulationMaster, run_cosimulation
from src.master.cosim_config import CosimConfig
from src.master.integrator import MicroIntegrator, MicroResult, micro_advance, solve_monolithic
from src.master.record import TrajectoryRecord, read_record_csv, write_record_csv
from src.master.reference import reference_run
from src.master.subsystem import Subsystem

__all__ = [
    "CosimConfig",
    "CosimulationMaster",
    "MicroIntegrator",
    "MicroResult",
    "Subsystem",
    "TrajectoryRecord",
    "micro_advance",
    "read_record_csv",
    "reference_run",
    "run_cosimulation",
    "solve_monolithic",
    "write_record_csv",
]
