from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

# ─────────────────────────────────────────────────────────────────────────────
# Conditional synthesis samples
# ─────────────────────────────────────────────────────────────────────────────

CONDITION_SIZE = 32
ANCHOR_GAP = 4


class ConditionMap(BaseModel):
    """Two constant channels: ch0 = tau / T, ch1 = k / 4."""

    model_config = ConfigDict(extra="ignore", arbitrary_types_allowed=True)

    values: np.ndarray

    @field_validator("values", mode="before")
    @classmethod
    def _as_float32(cls, v: Any) -> np.ndarray:
        arr = np.asarray(v, dtype=np.float32)
        if arr.shape != (2, CONDITION_SIZE, CONDITION_SIZE):
            raise ValueError(f"condition map must be 2x32x32, got {arr.shape}")
        return arr

    @property
    def tau_fraction(self) -> float:
        return float(self.values[0, 0, 0])

    @property
    def k_fraction(self) -> float:
        return float(self.values[1, 0, 0])


class SynthesisSample(BaseModel):
    """Anchors at tau and tau+4, target at tau+k.

    Channel stacking is fixed: ``mag_in`` = [tau, tau+4]; ``phase_in`` =
    [tau x, tau y, tau z, tau+4 x, tau+4 y, tau+4 z]; ``mask_in`` = [tau, tau+4].
    """

    model_config = ConfigDict(extra="ignore", arbitrary_types_allowed=True)

    mag_in: np.ndarray
    phase_in: np.ndarray
    mask_in: np.ndarray
    mag_target: np.ndarray
    phase_target: np.ndarray
    mask_target: np.ndarray
    condition: ConditionMap
    tau: int
    k: int
    series_ref: str = ""

    @property
    def t(self) -> float:
        """Interpolation weight k / 4."""
        return self.k / ANCHOR_GAP

    @property
    def target_index(self) -> int:
        return self.tau + self.k

    @property
    def shape_hw(self) -> tuple[int, int]:
        return int(self.mag_in.shape[-2]), int(self.mag_in.shape[-1])

    @property
    def key(self) -> str:
        return f"{self.series_ref}:tau={self.tau}:k={self.k}"

    def anchor_phase(self, which: int) -> np.ndarray:
        """Phase of anchor 0 (tau) or 1 (tau+4) as [3,H,W]."""
        return self.phase_in[3 * which : 3 * which + 3]

    def __repr__(self) -> str:  # pragma: no cover - trivial
        return f"SynthesisSample({self.key}, hw={self.shape_hw})"


class FrameSource(BaseModel):
    """Where a reconstructed frame comes from: an acquired anchor or a (tau, k) sample."""

    model_config = ConfigDict(extra="ignore", frozen=True)

    frame: int = Field(..., ge=0)
    kind: Literal["anchor", "synthesized"]
    tau: int = -1
    k: int = Field(default=0, ge=0, le=ANCHOR_GAP - 1)
