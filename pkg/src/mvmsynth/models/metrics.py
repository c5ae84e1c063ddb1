import numpy as np
from pydantic import BaseModel, ConfigDict, Field

MODALITIES: tuple[str, str] = ("magnitude", "phase")
QUALITY_METRICS: tuple[str, str, str] = ("mae", "psnr", "ssim")


class ScoreAggregate(BaseModel):
    model_config = ConfigDict(extra="ignore", ser_json_inf_nan="constants")
    count: int
    min: float
    max: float
    mean: float
    median: float
    stdev: float = Field(description="Population standard deviation (σ).")
    variance: float = Field(description="Population variance (σ²).")

    def short(self, digits: int = 3) -> str:
        return f"{self.mean:.{digits}f} ± {self.stdev:.{digits}f}"


def aggregate_numbers(values: list[float]) -> ScoreAggregate:
    """Aggregate a list of numeric values computing standard statistics.

    Infinite PSNR sentinels propagate into the mean (and make the spread NaN).
    """
    if not values:
        raise ValueError("Cannot aggregate empty value list")
    arr = np.asarray(values, dtype=np.float64)
    with np.errstate(invalid="ignore", over="ignore"):
        var = float(arr.var()) if arr.size > 1 else 0.0
        return ScoreAggregate(
            count=int(arr.size),
            min=float(arr.min()),
            max=float(arr.max()),
            mean=float(arr.mean()),
            median=float(np.median(arr)),
            stdev=float(np.sqrt(var)) if arr.size > 1 else 0.0,
            variance=var,
        )


class ModalityMetrics(BaseModel):
    model_config = ConfigDict(extra="ignore", ser_json_inf_nan="constants")
    mae: float
    psnr: float
    ssim: float


class SampleMetrics(BaseModel):
    """Metrics of one synthesized frame."""

    model_config = ConfigDict(extra="ignore")

    key: str
    magnitude: ModalityMetrics
    phase: ModalityMetrics
    dice: float | None = None


class MetricReport(BaseModel):
    """Per-sample metrics and their aggregates (mean ± sd)."""

    model_config = ConfigDict(extra="ignore", ser_json_inf_nan="constants")

    samples: list[SampleMetrics] = Field(default_factory=list)
    aggregates: dict[str, ScoreAggregate] = Field(
        default_factory=dict, description="Keys like 'magnitude.psnr', 'dice'."
    )
    velocity_coefficient: ScoreAggregate | None = None
    velocity_per_series: dict[str, float | None] = Field(default_factory=dict)
    failures: list[str] = Field(default_factory=list)

    def value(self, key: str) -> float | None:
        agg = self.aggregates.get(key)
        return None if agg is None else agg.mean
