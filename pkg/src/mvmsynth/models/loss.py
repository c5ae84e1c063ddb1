from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class LossConfig(BaseModel):
    """Weights and constants of the combined synthesis + segmentation loss."""

    model_config = ConfigDict(extra="ignore")

    w_syn: float = Field(default=1.0, ge=0.0)
    w_seg: float = Field(default=1.0, ge=0.0)
    weighted: bool = True
    background_floor: float = Field(default=0.1, ge=0.0, description="Weight floor epsilon.")
    bg_threshold: float = 0.1
    dilation_px: int = Field(default=2, ge=0)
    dice_smooth: float = Field(default=1.0, ge=0.0)
    weight_phase: bool = Field(
        default=True, description="Apply the same weight map to the phase MAE."
    )

    @model_validator(mode="after")
    def _positive_total(self) -> "LossConfig":
        if self.w_syn + self.w_seg <= 0:
            raise ValueError("w_syn + w_seg must be > 0")
        return self


class LossBreakdown(BaseModel):
    """Per-term values of one loss evaluation (already reduced over the batch)."""

    model_config = ConfigDict(extra="ignore")

    syn_mag: float
    syn_phase: float
    dice: float
    boundary: float
    total: float
    w_syn: float
    w_seg: float

    def recombined(self) -> float:
        return self.w_syn * (self.syn_mag + self.syn_phase) + self.w_seg * (
            self.dice + self.boundary
        )


class SampleTargets(BaseModel):
    """Per-sample loss inputs derived from ground truth, each [H, W] float32."""

    model_config = ConfigDict(extra="ignore", frozen=True, arbitrary_types_allowed=True)

    omega1: np.ndarray
    omega2: np.ndarray
    sdm: np.ndarray

    @field_validator("omega1", "omega2", "sdm", mode="before")
    @classmethod
    def _as_float32(cls, v: Any) -> np.ndarray:
        arr = np.asarray(v, dtype=np.float32)
        if arr.ndim != 2:
            raise ValueError(f"expected an [H, W] map, got shape {arr.shape}")
        return arr

    @model_validator(mode="after")
    def _same_shape(self) -> "SampleTargets":
        if not (self.omega1.shape == self.omega2.shape == self.sdm.shape):
            raise ValueError(
                f"map shapes differ: {self.omega1.shape}, {self.omega2.shape}, {self.sdm.shape}"
            )
        return self
