from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator


class HSConfig(BaseModel):
    """Horn-Schunck solver constants."""

    model_config = ConfigDict(extra="ignore")

    alpha: float = Field(default=10.0, gt=0.0, description="Smoothness weight.")
    iterations: int = Field(default=200, ge=1)
    stop_tol: float = Field(default=1e-4, ge=0.0, description="Mean |du|+|dv| stop threshold.")
    intensity_scale: float = Field(
        default=255.0, gt=0.0, description="Grey-level scale applied to magnitude before flow."
    )


class FlowField(BaseModel):
    """Dense displacement in pixels per frame gap (u along x, v along y)."""

    model_config = ConfigDict(extra="ignore", arbitrary_types_allowed=True)

    u: np.ndarray
    v: np.ndarray
    iterations_run: int = 0

    @field_validator("u", "v", mode="before")
    @classmethod
    def _as_float64(cls, v: Any) -> np.ndarray:
        return np.asarray(v, dtype=np.float64)

    @classmethod
    def zeros(cls, shape: tuple[int, int]) -> "FlowField":
        return cls(u=np.zeros(shape), v=np.zeros(shape))

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.u.shape)
