# Benchmark systems
from src.models.benchmarks import (
    MODELS,
    BenchmarkModel,
    DoubleSpringMass,
    DoubleSpringMassParams,
    Link,
    MovingGround,
    MovingGroundParams,
    SplitSystemSpec,
    SpringMass,
    SpringMassParams,
    SubsystemSpec,
    analytic_reference,
    energy,
    get_model,
    monolithic_rhs,
    spring_mass_split,
)

__all__ = [
    "MODELS",
    "BenchmarkModel",
    "DoubleSpringMass",
    "DoubleSpringMassParams",
    "Link",
    "MovingGround",
    "MovingGroundParams",
    "SplitSystemSpec",
    "SpringMass",
    "SpringMassParams",
    "SubsystemSpec",
    "analytic_reference",
    "energy",
    "get_model",
    "monolithic_rhs",
    "spring_mass_split",
]
