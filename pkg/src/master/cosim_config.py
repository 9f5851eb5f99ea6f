"""
Co-simulation Config - Validated run configuration.
Fields left out are filled from config/settings.yaml.
"""
import logging
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.balance import CorrectionPolicy
from src.config import settings
from src.master.integrator import MicroIntegrator

logger = logging.getLogger(__name__)


def _cosim(key: str):
    return lambda: settings()["cosim"][key]


def _micro(key: str):
    return lambda: settings()["micro"][key]


class CosimConfig(BaseModel):
    """One co-simulation run."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    model: str = "spring-mass"
    H: float = Field(default_factory=_cosim("H"), gt=0)
    t_end: float = Field(default_factory=_cosim("t_end"))
    t0: float = 0.0
    ext_order: Literal[0, 1] = Field(default_factory=_cosim("ext_order"))
    smoothing: bool = Field(default_factory=_cosim("smoothing"))
    policy: CorrectionPolicy = Field(default_factory=lambda: CorrectionPolicy.parse(settings()["cosim"]["policy"]))
    method: str = Field(default_factory=_micro("method"))
    abs_tol: float = Field(default_factory=_micro("abs_tol"), gt=0)
    rel_tol: float = Field(default_factory=_micro("rel_tol"), gt=0)
    max_step: float | None = Field(default_factory=_micro("max_step"))
    dense: int = Field(default_factory=_cosim("dense"), ge=1)
    workers: int = Field(default_factory=_cosim("workers"), ge=1)
    params: dict[str, float] = Field(default_factory=dict)
    initial: tuple[float, ...] | None = None

    @field_validator("policy", mode="before")
    @classmethod
    def _parse_policy(cls, value):
        return CorrectionPolicy.parse(value)

    @model_validator(mode="after")
    def _check_grid(self) -> "CosimConfig":
        span = self.t_end - self.t0
        if not span > 0:
            raise ValueError(f"t_end must exceed t0, got t0={self.t0}, t_end={self.t_end}")
        steps = round(span / self.H)
        if steps < 1 or abs(steps * self.H - span) > 1e-12 * max(1.0, abs(span)):
            raise ValueError(f"H={self.H} does not divide the horizon {span}")
        width = self.policy.support_steps * self.H
        if width >= span:
            logger.warning(f"Correction support {width} is not shorter than the horizon {span}; refeed stays incomplete")
        return self

    @property
    def n_steps(self) -> int:
        return round((self.t_end - self.t0) / self.H)

    def grid_time(self, j: int) -> float:
        """Exchange time t_j = t0 + j H."""
        return self.t0 + j * self.H

    def micro_integrator(self) -> MicroIntegrator:
        return MicroIntegrator(method=self.method, abs_tol=self.abs_tol, rel_tol=self.rel_tol, max_step=self.max_step)

    def with_updates(self, **changes) -> "CosimConfig":
        """Validated copy with some fields replaced."""
        return CosimConfig(**{**self.model_dump(), **changes})

    def label(self) -> str:
        smooth = "on" if self.smoothing else "off"
        return f"{self.model} H={self.H:g} ext={self.ext_order} smoothing={smooth} bc={self.policy.value}"
