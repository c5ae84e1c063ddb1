from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, Field

from mvmsynth.models.flow import HSConfig
from mvmsynth.models.loss import LossConfig
from mvmsynth.models.metrics import MetricReport
from mvmsynth.models.network import NetworkConfig

# ─────────────────────────────────────────────────────────────────────────────
# Training configuration
# ─────────────────────────────────────────────────────────────────────────────


class DataConfig(BaseModel):
    """Where the dataset lives: a ``split.json`` file (see DatasetSplit)."""

    model_config = ConfigDict(extra="ignore")

    split_path: Path | None = None


class TrainConfig(BaseModel):
    """Training loop settings. Defaults are the desk-scale profile."""

    model_config = ConfigDict(extra="ignore")

    learning_rate: float = Field(default=0.001, ge=0.0)
    batch_size: int = Field(default=8, ge=1)
    epochs: int = Field(default=50, ge=1)
    max_steps: int | None = Field(default=None, ge=1, description="Hard cap on optimizer steps.")
    beta1: float = 0.9
    beta2: float = 0.999
    seed: int = 0
    net: NetworkConfig = Field(default_factory=lambda: NetworkConfig(base_channels=8))
    loss: LossConfig = Field(default_factory=LossConfig)
    data: DataConfig = Field(default_factory=DataConfig)
    checkpoint_dir: Path | None = None
    eval_every: int = Field(default=50, ge=1, description="Validation period in steps.")
    patience: int = Field(default=10, ge=1, description="Early stopping, in evaluations.")
    log_every: int = Field(default=10, ge=1)
    num_workers: int = Field(default=0, ge=0)

    @classmethod
    def full_scale(cls, **overrides: Any) -> "TrainConfig":
        """512x512 / batch 32 profile."""
        base: dict[str, Any] = {"batch_size": 32, "net": NetworkConfig(base_channels=16)}
        base.update(overrides)
        return cls(**base)


class EvalConfig(BaseModel):
    """Evaluation switches."""

    model_config = ConfigDict(extra="ignore")

    methods: list[str] = Field(default_factory=lambda: ["linear", "hs_flow", "model"])
    hs: HSConfig = Field(default_factory=HSConfig)
    use_gt_masks: bool = Field(
        default=False, description="Velocity coefficient with ground-truth masks for the model."
    )
    mask_threshold: float = 0.5


# ─────────────────────────────────────────────────────────────────────────────
# Reports
# ─────────────────────────────────────────────────────────────────────────────


class MethodResult(BaseModel):
    model_config = ConfigDict(extra="ignore")

    method: str
    metrics: MetricReport


class AblationResult(BaseModel):
    """One row of the ablation grid."""

    model_config = ConfigDict(extra="ignore", ser_json_inf_nan="constants")

    row: str
    independent_encoders: bool
    independent_decoders: bool
    shared_bottleneck: bool
    weighted_loss: bool
    magnitude_psnr: float | None = None
    phase_psnr: float | None = None
    dice: float | None = None
    velocity_coefficient: float | None = None
    config_hash: str = ""


class ExperimentReport(BaseModel):
    """Everything an evaluation or ablation run produced."""

    model_config = ConfigDict(extra="ignore", ser_json_inf_nan="constants")

    methods: list[MethodResult] = Field(default_factory=list)
    ablations: list[AblationResult] = Field(default_factory=list)
    velocity_coefficients: dict[str, float | None] = Field(default_factory=dict)
    wall_clock_s: float = 0.0
    config_hash: str = ""
    dataset_hash: str = ""
    seed: int = 0

    def method(self, name: str) -> MethodResult | None:
        for m in self.methods:
            if m.method == name:
                return m
        return None

    @property
    def is_empty(self) -> bool:
        return not self.methods and not self.ablations
