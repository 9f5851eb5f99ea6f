"""
Benchmark Models - Spring-mass, double spring-mass and moving-ground systems.
Each model provides its split (co-simulation) form, the affine coupled
system, an analytic reference and an energy diagnostic.
"""
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass, fields
from typing import Any, Callable

import numpy as np
from scipy.linalg import expm

from src.config import settings
from src.errors import ModelError

logger = logging.getLogger(__name__)

Rhs = Callable[[float, np.ndarray, np.ndarray], np.ndarray]
OutputMap = Callable[[float, np.ndarray], np.ndarray]


# =============================================================================
# Parameters
# =============================================================================

def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ModelError(message)


@dataclass(frozen=True)
class SpringMassParams:
    m: float = 1.0
    c: float = 1.0
    d: float = 0.0

    def __post_init__(self):
        _require(self.m > 0, f"mass m must be positive, got {self.m}")
        _require(self.c >= 0, f"stiffness c must be nonnegative, got {self.c}")
        _require(self.d >= 0, f"damping d must be nonnegative, got {self.d}")


@dataclass(frozen=True)
class DoubleSpringMassParams:
    m1: float = 1.0
    c1: float = 4.0 * math.pi**2
    m2: float = 0.0005
    c2: float = 5.0
    d1: float = 0.0
    d2: float = 0.0
    l01: float = 0.0
    l02: float = 0.0

    def __post_init__(self):
        _require(self.m1 > 0 and self.m2 > 0, f"masses must be positive, got m1={self.m1}, m2={self.m2}")
        _require(self.c1 >= 0 and self.c2 >= 0, "stiffnesses must be nonnegative")
        _require(self.d1 >= 0 and self.d2 >= 0, "dampings must be nonnegative")


@dataclass(frozen=True)
class MovingGroundParams:
    m: float = 0.0005
    c: float = 5.0
    d: float = 0.0
    x_t0: float = 1.0
    omega1: float = 2.0 * math.pi
    h0: float = 0.0

    def __post_init__(self):
        _require(self.m > 0, f"mass m must be positive, got {self.m}")
        _require(self.c > 0, f"stiffness c must be positive, got {self.c}")
        _require(self.d >= 0, f"damping d must be nonnegative, got {self.d}")
        _require(self.omega1 > 0, f"ground frequency omega1 must be positive, got {self.omega1}")

    @property
    def omega2(self) -> float:
        return math.sqrt(self.c / self.m)


# =============================================================================
# Split system description
# =============================================================================

@dataclass(frozen=True)
class SubsystemSpec:
    """
    One subsystem of a split model.

    Outputs depend on the state only (no direct feedthrough).
    """

    name: str
    initial: tuple[float, ...]
    rhs: Rhs
    output: OutputMap
    n_in: int
    n_out: int

    @property
    def n_state(self) -> int:
        return len(self.initial)


@dataclass(frozen=True)
class Link:
    """Output `source_out` of subsystem `source` drives input `target_in` of `target`."""

    source: int
    source_out: int
    target: int
    target_in: int


@dataclass(frozen=True)
class SplitSystemSpec:
    """
    Subsystems plus wiring. Channel k is links[k]; links are ordered by
    source subsystem and output index.
    """

    name: str
    subsystems: tuple[SubsystemSpec, ...]
    links: tuple[Link, ...]
    energy: Callable[[np.ndarray], float]

    def __post_init__(self):
        outputs = [(i, k) for i, s in enumerate(self.subsystems) for k in range(s.n_out)]
        inputs = [(i, k) for i, s in enumerate(self.subsystems) for k in range(s.n_in)]
        used_out = [(l.source, l.source_out) for l in self.links]
        used_in = [(l.target, l.target_in) for l in self.links]
        if sorted(used_out) != outputs or sorted(set(used_in)) != sorted(inputs) or len(used_in) != len(inputs):
            raise ModelError(f"Wiring of {self.name} is not a bijection between outputs and inputs")
        if used_out != outputs:
            raise ModelError(f"Links of {self.name} must be ordered by source subsystem and output index")

    @property
    def n_channels(self) -> int:
        return len(self.links)

    @property
    def offsets(self) -> list[int]:
        """Start index of each subsystem in the concatenated state."""
        return list(np.cumsum([0] + [s.n_state for s in self.subsystems])[:-1])

    @property
    def n_state(self) -> int:
        return sum(s.n_state for s in self.subsystems)

    def initial_state(self) -> np.ndarray:
        return np.concatenate([np.asarray(s.initial, dtype=float) for s in self.subsystems])

    def slices(self, state: np.ndarray) -> list[np.ndarray]:
        return [state[o:o + s.n_state] for o, s in zip(self.offsets, self.subsystems)]

    def channels_into(self, target: int) -> list[int]:
        """Channels feeding subsystem `target`, in input order."""
        feeding = [(l.target_in, k) for k, l in enumerate(self.links) if l.target == target]
        return [k for _, k in sorted(feeding)]

    def outputs(self, t: float, state: np.ndarray) -> np.ndarray:
        """All channel values for a concatenated state."""
        parts = self.slices(state)
        per_sub = [np.atleast_1d(s.output(t, x)) for s, x in zip(self.subsystems, parts)]
        return np.array([per_sub[l.source][l.source_out] for l in self.links], dtype=float)

    def coupled_rhs(self, t: float, state: np.ndarray) -> np.ndarray:
        """Vector field of the split system fed with exact inputs."""
        y = self.outputs(t, state)
        parts = self.slices(state)
        derivs = []
        for i, (sub, x) in enumerate(zip(self.subsystems, parts)):
            u = y[self.channels_into(i)]
            derivs.append(np.asarray(sub.rhs(t, x, u), dtype=float))
        return np.concatenate(derivs)


# =============================================================================
# Models
# =============================================================================

class BenchmarkModel(ABC):
    """Affine benchmark system with a split form."""

    model_id: str = ""
    params_type: type = SpringMassParams
    receiver_velocity_index: int = 1

    def __init__(self, params: Any = None, initial: list[float] | None = None):
        self.params = params if params is not None else self.params_type()
        self._initial = None if initial is None else np.asarray(initial, dtype=float)

    @abstractmethod
    def linear_system(self) -> tuple[np.ndarray, np.ndarray]:
        """(A, b) with x' = A x + b in concatenated subsystem coordinates."""

    @abstractmethod
    def split(self) -> SplitSystemSpec:
        """Co-simulation form of the model."""

    @abstractmethod
    def energy(self, state: np.ndarray) -> float:
        """Mechanical energy of a coupled state."""

    def default_initial(self) -> np.ndarray:
        return np.zeros(self.n_state)

    @property
    def n_state(self) -> int:
        return self.linear_system()[0].shape[0]

    def initial_state(self) -> np.ndarray:
        if self._initial is not None:
            return self._initial.copy()
        return self.default_initial()

    def check_state(self, state) -> np.ndarray:
        state = np.asarray(state, dtype=float)
        if state.shape != (self.n_state,):
            raise ModelError(f"{self.model_id} expects a state of dimension {self.n_state}, got shape {state.shape}")
        return state

    def monolithic_rhs(self, t: float, state) -> np.ndarray:
        A, b = self.linear_system()
        return A @ self.check_state(state) + b

    def reference_matrix(self) -> np.ndarray:
        """Augmented matrix [[A, b], [0, 0]] for the exponential reference."""
        A, b = self.linear_system()
        n = A.shape[0]
        M = np.zeros((n + 1, n + 1))
        M[:n, :n] = A
        M[:n, n] = b
        return M

    def analytic_reference(self, t: float, initial=None) -> np.ndarray:
        """Exact state at time t from `initial` at time 0."""
        x0 = self.initial_state() if initial is None else self.check_state(initial)
        return self._expm_reference(t, x0)

    def _expm_reference(self, t: float, x0: np.ndarray) -> np.ndarray:
        z0 = np.append(x0, 1.0)
        return (expm(self.reference_matrix() * t) @ z0)[:-1]

    def describe(self) -> dict[str, Any]:
        return {"model": self.model_id, **asdict(self.params)}


class SpringMass(BenchmarkModel):
    """
    Spring and mass split into two one-state subsystems.

    Coupled state: (s, v), spring elongation and mass velocity.
    """

    model_id = "spring-mass"
    params_type = SpringMassParams
    receiver_velocity_index = 1

    def default_initial(self) -> np.ndarray:
        return np.array([1.0, 0.0])

    def linear_system(self) -> tuple[np.ndarray, np.ndarray]:
        p = self.params
        A = np.array([[0.0, 1.0], [-p.c / p.m, -p.d / p.m]])
        return A, np.zeros(2)

    def split(self) -> SplitSystemSpec:
        p = self.params
        x0 = self.initial_state()

        spring = SubsystemSpec(
            name="spring",
            initial=(float(x0[0]),),
            rhs=lambda t, x, u: np.array([u[0]]),
            output=lambda t, x: np.array([-p.c * x[0]]),
            n_in=1,
            n_out=1,
        )
        # v' = F/m keeps the split field equal to the monolithic one for F = -c s
        mass = SubsystemSpec(
            name="mass",
            initial=(float(x0[1]),),
            rhs=lambda t, x, u: np.array([u[0] / p.m - p.d / p.m * x[0]]),
            output=lambda t, x: np.array([x[0]]),
            n_in=1,
            n_out=1,
        )
        links = (Link(0, 0, 1, 0), Link(1, 0, 0, 0))
        return SplitSystemSpec(self.model_id, (spring, mass), links, self.energy)

    def energy(self, state) -> float:
        s, v = self.check_state(state)
        return 0.5 * self.params.m * v * v + 0.5 * self.params.c * s * s

    def analytic_reference(self, t: float, initial=None) -> np.ndarray:
        p = self.params
        s0, v0 = self.initial_state() if initial is None else self.check_state(initial)
        if p.d != 0.0:
            return self._expm_reference(t, np.array([s0, v0]))
        if p.c == 0.0:
            return np.array([s0 + v0 * t, v0])
        w = math.sqrt(p.c / p.m)
        cos, sin = math.cos(w * t), math.sin(w * t)
        return np.array([s0 * cos + v0 / w * sin, -s0 * w * sin + v0 * cos])


class DoubleSpringMass(BenchmarkModel):
    """
    Heavy and light mass exchanging positions and velocities.

    Coupled state: (x1, v1, x2, v2).
    """

    model_id = "double-spring-mass"
    params_type = DoubleSpringMassParams
    receiver_velocity_index = 3

    def default_initial(self) -> np.ndarray:
        return np.array([1.0, 0.0, 1.0, 0.0])

    def linear_system(self) -> tuple[np.ndarray, np.ndarray]:
        p = self.params
        A = np.array([
            [0.0, 1.0, 0.0, 0.0],
            [-(p.c1 + p.c2) / p.m1, -(p.d1 + p.d2) / p.m1, p.c2 / p.m1, p.d2 / p.m1],
            [0.0, 0.0, 0.0, 1.0],
            [p.c2 / p.m2, p.d2 / p.m2, -p.c2 / p.m2, -p.d2 / p.m2],
        ])
        b = np.array([0.0, (p.c1 * p.l01 - p.c2 * p.l02) / p.m1, 0.0, p.c2 * p.l02 / p.m2])
        return A, b

    def split(self) -> SplitSystemSpec:
        p = self.params
        x0 = self.initial_state()

        def heavy_rhs(t, x, u):
            x1, v1 = x
            x2, v2 = u
            force = -p.c1 * (x1 - p.l01) - p.d1 * v1 + p.c2 * (x2 - x1 - p.l02) + p.d2 * (v2 - v1)
            return np.array([v1, force / p.m1])

        def light_rhs(t, x, u):
            x2, v2 = x
            x1, v1 = u
            force = -p.c2 * (x2 - x1 - p.l02) - p.d2 * (v2 - v1)
            return np.array([v2, force / p.m2])

        heavy = SubsystemSpec("heavy", tuple(float(v) for v in x0[:2]), heavy_rhs, lambda t, x: np.array(x), 2, 2)
        light = SubsystemSpec("light", tuple(float(v) for v in x0[2:]), light_rhs, lambda t, x: np.array(x), 2, 2)
        links = (Link(0, 0, 1, 0), Link(0, 1, 1, 1), Link(1, 0, 0, 0), Link(1, 1, 0, 1))
        return SplitSystemSpec(self.model_id, (heavy, light), links, self.energy)

    def energy(self, state) -> float:
        p = self.params
        x1, v1, x2, v2 = self.check_state(state)
        kinetic = 0.5 * p.m1 * v1 * v1 + 0.5 * p.m2 * v2 * v2
        potential = 0.5 * p.c1 * (x1 - p.l01) ** 2 + 0.5 * p.c2 * (x2 - x1 - p.l02) ** 2
        return kinetic + potential


class MovingGround(BenchmarkModel):
    """
    Light spring-mass on harmonically moving ground.

    The ground is its own oscillator subsystem exporting its displacement.
    Coupled state: (g, g', x, v).
    """

    model_id = "moving-ground"
    params_type = MovingGroundParams
    receiver_velocity_index = 3

    def default_initial(self) -> np.ndarray:
        # relaxed spring at t = 0
        p = self.params
        return np.array([p.x_t0, 0.0, p.x_t0 + p.h0, 0.0])

    def ground(self, t):
        p = self.params
        return p.x_t0 * np.cos(p.omega1 * np.asarray(t, dtype=float))

    def linear_system(self) -> tuple[np.ndarray, np.ndarray]:
        p = self.params
        k = p.c / p.m
        A = np.array([
            [0.0, 1.0, 0.0, 0.0],
            [-p.omega1**2, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [k, 0.0, -k, -p.d / p.m],
        ])
        return A, np.array([0.0, 0.0, 0.0, k * p.h0])

    def split(self) -> SplitSystemSpec:
        p = self.params
        x0 = self.initial_state()
        w1 = p.omega1

        ground = SubsystemSpec(
            name="ground",
            initial=(float(x0[0]), float(x0[1])),
            rhs=lambda t, x, u: np.array([x[1], -w1 * w1 * x[0]]),
            output=lambda t, x: np.array([x[0]]),
            n_in=0,
            n_out=1,
        )
        mass = SubsystemSpec(
            name="mass",
            initial=(float(x0[2]), float(x0[3])),
            rhs=lambda t, x, u: np.array([x[1], -p.c / p.m * (x[0] - u[0] - p.h0) - p.d / p.m * x[1]]),
            output=lambda t, x: np.zeros(0),
            n_in=1,
            n_out=0,
        )
        return SplitSystemSpec(self.model_id, (ground, mass), (Link(0, 0, 1, 0),), self.energy)

    def monolithic_rhs(self, t: float, state) -> np.ndarray:
        """Accepts the coupled state (g, g', x, v) or the mass state (x, v) with prescribed ground."""
        state = np.asarray(state, dtype=float)
        if state.shape == (2,):
            p = self.params
            x, v = state
            return np.array([v, -p.c / p.m * (x - float(self.ground(t)) - p.h0) - p.d / p.m * v])
        return super().monolithic_rhs(t, state)

    def energy(self, state) -> float:
        p = self.params
        g, _, x, v = self.check_state(state)
        return 0.5 * p.m * v * v + 0.5 * p.c * (x - g - p.h0) ** 2

    def analytic_reference(self, t: float, initial=None) -> np.ndarray:
        p = self.params
        z0 = self.initial_state() if initial is None else self.check_state(initial)
        w1, w2 = p.omega1, p.omega2
        if p.d != 0.0 or math.isclose(w1, w2, rel_tol=1e-9):
            return self._expm_reference(t, z0)

        g0, gd0, x0, v0 = z0
        g = g0 * math.cos(w1 * t) + gd0 / w1 * math.sin(w1 * t)
        gd = -g0 * w1 * math.sin(w1 * t) + gd0 * math.cos(w1 * t)
        gain = w2 * w2 / (w2 * w2 - w1 * w1)
        # forced response tracks the ground; the rest oscillates at omega2
        amp_c = x0 - (p.h0 + gain * g0)
        amp_s = (v0 - gain * gd0) / w2
        x = p.h0 + gain * g + amp_c * math.cos(w2 * t) + amp_s * math.sin(w2 * t)
        v = gain * gd - amp_c * w2 * math.sin(w2 * t) + amp_s * w2 * math.cos(w2 * t)
        return np.array([g, gd, x, v])


# =============================================================================
# Registry and module-level operations
# =============================================================================

MODELS: dict[str, type[BenchmarkModel]] = {
    SpringMass.model_id: SpringMass,
    DoubleSpringMass.model_id: DoubleSpringMass,
    MovingGround.model_id: MovingGround,
}


def get_model(model_id: str, overrides: dict[str, float] | None = None, initial: list[float] | None = None) -> BenchmarkModel:
    """
    Build a benchmark model with configured defaults.

    Args:
        model_id: One of the MODELS keys.
        overrides: Parameter overrides, e.g. {"c": 2.0}.
        initial: Optional initial coupled state.

    Returns:
        The model instance.
    """
    if model_id not in MODELS:
        raise ModelError(f"Unknown model {model_id!r}; expected one of: {', '.join(MODELS)}")
    cls = MODELS[model_id]
    config = settings()["models"].get(model_id, {})

    values = dict(config.get("params") or {})
    names = {f.name for f in fields(cls.params_type)}
    for key, value in (overrides or {}).items():
        if key not in names:
            raise ModelError(f"Unknown parameter {key!r} for {model_id}; expected one of: {', '.join(sorted(names))}")
        values[key] = float(value)

    model = cls(cls.params_type(**values), initial if initial is not None else config.get("initial"))
    if initial is not None or config.get("initial") is not None:
        model.check_state(model.initial_state())
    return model


def spring_mass_split(params: SpringMassParams | None = None) -> SplitSystemSpec:
    """Split form of the spring-mass system."""
    return SpringMass(params).split()


def monolithic_rhs(model: BenchmarkModel, t: float, state) -> np.ndarray:
    return model.monolithic_rhs(t, state)


def analytic_reference(model: BenchmarkModel, t: float, initial=None) -> np.ndarray:
    return model.analytic_reference(t, initial)


def energy(model: BenchmarkModel, state) -> float:
    return model.energy(state)


if __name__ == "__main__":
    # Quick test
    model = get_model("spring-mass")
    print(model.describe())
    print(f"x(pi) = {analytic_reference(model, math.pi)}")
    print(f"E0    = {energy(model, model.initial_state())}")
