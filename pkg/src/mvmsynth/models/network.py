from enum import Enum
from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

# ─────────────────────────────────────────────────────────────────────────────
# Network configuration (ablation axes)
# ─────────────────────────────────────────────────────────────────────────────

MAG_IN, PHASE_IN, MASK_IN = 2, 6, 2
MAG_OUT, PHASE_OUT, MASK_OUT = 1, 3, 1


class NetworkConfig(BaseModel):
    """Multi-head multi-tail attention UNet configuration."""

    model_config = ConfigDict(extra="ignore")

    base_channels: int = Field(default=16, ge=1)
    depth: Literal[4] = 4
    independent_encoders: bool = True
    independent_decoders: bool = True
    shared_bottleneck: bool = True
    use_attention: bool = True
    norm: Literal["instance"] = "instance"

    @property
    def reduction(self) -> int:
        return 2**self.depth


class AblationRow(str, Enum):
    sep_no_shared = "sep_no_shared"
    shared_no_independent = "shared_no_independent"
    no_weighted_loss = "no_weighted_loss"
    full = "full"


# ─────────────────────────────────────────────────────────────────────────────
# Checkpoint
# ─────────────────────────────────────────────────────────────────────────────


class TrainingMetadata(BaseModel):
    model_config = ConfigDict(extra="ignore")

    step: int = 0
    seed: int = 0
    best_val_loss: float | None = None
    loss_history: list[dict[str, float]] = Field(default_factory=list)
    val_history: list[dict[str, float]] = Field(default_factory=list)
    extra: dict[str, Any] = Field(default_factory=dict)


class Checkpoint(BaseModel):
    """Network configuration plus named float32 parameter arrays."""

    model_config = ConfigDict(extra="ignore", arbitrary_types_allowed=True)

    config: NetworkConfig
    parameters: dict[str, np.ndarray]
    metadata: TrainingMetadata = Field(default_factory=TrainingMetadata)

    def __repr__(self) -> str:  # pragma: no cover - trivial
        n = sum(int(a.size) for a in self.parameters.values())
        return f"Checkpoint(step={self.metadata.step}, tensors={len(self.parameters)}, size={n})"
