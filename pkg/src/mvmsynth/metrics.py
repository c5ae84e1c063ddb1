"""Image quality and agreement metrics plus their report / table rendering.

Images are compared on the stored scale (``data_range`` 1.0 by default).
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence

import numpy as np
from scipy import stats
from skimage.metrics import structural_similarity

from mvmsynth.errors import ArgumentError, DegenerateError, NumericError, ShapeError
from mvmsynth.models.experiment import ExperimentReport
from mvmsynth.models.metrics import (
    MODALITIES,
    QUALITY_METRICS,
    MetricReport,
    ModalityMetrics,
    SampleMetrics,
    aggregate_numbers,
)

log = logging.getLogger("mvmsynth.metrics")

SSIM_SIGMA = 1.5
SSIM_WINDOW = 11
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _pair(pred: np.ndarray, target: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(pred, dtype=np.float64)
    b = np.asarray(target, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"pred {a.shape} vs target {b.shape}")
    return a, b


# ─────────────────────────────────────────────────────────────────────────────
# Scalar metrics
# ─────────────────────────────────────────────────────────────────────────────


def mae(pred: np.ndarray, target: np.ndarray) -> float:
    a, b = _pair(pred, target)
    return float(np.mean(np.abs(a - b)))


def psnr(pred: np.ndarray, target: np.ndarray, data_range: float = 1.0) -> float:
    """10 log10(range^2 / MSE); ``math.inf`` when the images are identical."""
    a, b = _pair(pred, target)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return float(10.0 * np.log10(data_range**2 / mse))


def ssim(pred: np.ndarray, target: np.ndarray, data_range: float = 1.0) -> float:
    """Mean Gaussian-window SSIM (11x11, sigma 1.5); leading channel axes are averaged."""
    a, b = _pair(pred, target)
    if a.ndim < 2 or min(a.shape[-2:]) < SSIM_WINDOW:
        raise ShapeError(
            f"ssim needs images of at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {a.shape}"
        )
    a2 = a.reshape(-1, *a.shape[-2:])
    b2 = b.reshape(-1, *b.shape[-2:])
    values = [
        structural_similarity(
            x,
            y,
            data_range=data_range,
            gaussian_weights=True,
            sigma=SSIM_SIGMA,
            use_sample_covariance=False,
            K1=SSIM_K1,
            K2=SSIM_K2,
        )
        for x, y in zip(a2, b2)
    ]
    return float(np.mean(values))


def dice_score(mask_a: np.ndarray, mask_b: np.ndarray) -> float:
    """2|A and B| / (|A| + |B|) of binary masks; two empty masks score 1.0."""
    a = np.asarray(mask_a) > 0.5
    b = np.asarray(mask_b) > 0.5
    if a.shape != b.shape:
        raise ShapeError(f"mask shapes differ: {a.shape} vs {b.shape}")
    total = int(a.sum()) + int(b.sum())
    if total == 0:
        return 1.0
    return 2.0 * int(np.logical_and(a, b).sum()) / total


def pearson(
    x: Sequence[float] | np.ndarray,
    y: Sequence[float] | np.ndarray,
    *,
    direction: str | None = None,
) -> float:
    a = np.asarray(x, dtype=np.float64).ravel()
    b = np.asarray(y, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ShapeError(f"series lengths differ: {a.size} vs {b.size}")
    if a.size < 2:
        raise ArgumentError("pearson needs at least two points")
    if not (np.isfinite(a).all() and np.isfinite(b).all()):
        raise NumericError("pearson: non-finite values")
    if np.ptp(a) == 0.0 or np.ptp(b) == 0.0:
        where = f" ({direction})" if direction else ""
        raise DegenerateError(f"correlation of a constant series{where}", direction=direction)
    r = stats.pearsonr(a, b)[0]
    return float(np.clip(r, -1.0, 1.0))


# ─────────────────────────────────────────────────────────────────────────────
# Per-sample metrics and reports
# ─────────────────────────────────────────────────────────────────────────────


def modality_metrics(
    pred: np.ndarray, target: np.ndarray, data_range: float = 1.0
) -> ModalityMetrics:
    """MAE / PSNR / SSIM averaged over the leading channel axis."""
    a, b = _pair(pred, target)
    a = a.reshape(-1, *a.shape[-2:])
    b = b.reshape(-1, *b.shape[-2:])
    return ModalityMetrics(
        mae=float(np.mean([mae(x, y) for x, y in zip(a, b)])),
        psnr=float(np.mean([psnr(x, y, data_range) for x, y in zip(a, b)])),
        ssim=ssim(a, b, data_range),
    )


def evaluate_prediction(
    key: str,
    mag_pred: np.ndarray,
    phase_pred: np.ndarray,
    mag_target: np.ndarray,
    phase_target: np.ndarray,
    mask_prob: np.ndarray | None = None,
    mask_target: np.ndarray | None = None,
    *,
    threshold: float = 0.5,
) -> SampleMetrics:
    dice = None
    if mask_prob is not None and mask_target is not None:
        dice = dice_score(np.asarray(mask_prob) >= threshold, mask_target)
    return SampleMetrics(
        key=key,
        magnitude=modality_metrics(mag_pred, mag_target),
        phase=modality_metrics(phase_pred, phase_target),
        dice=dice,
    )


def build_metric_report(
    samples: list[SampleMetrics],
    *,
    velocity_per_series: dict[str, float | None] | None = None,
    failures: list[str] | None = None,
) -> MetricReport:
    """Aggregate per-sample metrics into a MetricReport (mean, sd, ...)."""
    aggregates = {}
    if samples:
        for modality in MODALITIES:
            for metric in QUALITY_METRICS:
                values = [getattr(getattr(s, modality), metric) for s in samples]
                aggregates[f"{modality}.{metric}"] = aggregate_numbers(values)
        dices = [s.dice for s in samples if s.dice is not None]
        if dices:
            aggregates["dice"] = aggregate_numbers(dices)
    per_series = dict(velocity_per_series or {})
    coefficients = [v for v in per_series.values() if v is not None]
    return MetricReport(
        samples=samples,
        aggregates=aggregates,
        velocity_coefficient=aggregate_numbers(coefficients) if coefficients else None,
        velocity_per_series=per_series,
        failures=list(failures or []),
    )


# ─────────────────────────────────────────────────────────────────────────────
# Text tables
# ─────────────────────────────────────────────────────────────────────────────

_METHOD_LABELS = {
    "linear": "Linear interpolation",
    "hs_flow": "Horn-Schunck flow",
    "model": "Multi-task attention UNet",
}


def _fmt(v: float | None, digits: int = 4) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return "-"
    if math.isinf(v):
        return "inf"
    return f"{v:.{digits}f}"


def _align(rows: list[list[str]]) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    out = []
    for n, row in enumerate(rows):
        cells = [c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(row, widths))]
        out.append("  ".join(cells))
        if n == 0:
            out.append("  ".join("-" * w for w in widths))
    return "\n".join(out) + "\n"


def render_method_table(report: ExperimentReport) -> str:
    """Method x modality x {MAE, PSNR, SSIM} table (mean ± sd)."""
    header = ["Method", "Modality", "MAE", "PSNR (dB)", "SSIM"]
    rows = [header]
    for result in report.methods:
        label = _METHOD_LABELS.get(result.method, result.method)
        for modality in MODALITIES:
            cells = [label, modality]
            for metric in QUALITY_METRICS:
                agg = result.metrics.aggregates.get(f"{modality}.{metric}")
                cells.append("-" if agg is None else f"{_fmt(agg.mean)} ± {_fmt(agg.stdev)}")
            rows.append(cells)
            label = ""
    if len(rows) == 1:
        return "(no method rows)\n"
    return _align(rows)


def render_ablation_table(report: ExperimentReport) -> str:
    """Ablation grid: toggles plus magnitude PSNR, phase PSNR, Dice, velocity coefficient."""
    header = [
        "Row",
        "Indep. enc",
        "Shared neck",
        "Weighted",
        "Mag PSNR",
        "Phase PSNR",
        "Dice",
        "Vel. coef",
    ]
    rows = [header]
    mark = {True: "yes", False: "no"}
    for a in report.ablations:
        rows.append(
            [
                a.row,
                mark[a.independent_encoders],
                mark[a.shared_bottleneck],
                mark[a.weighted_loss],
                _fmt(a.magnitude_psnr, 3),
                _fmt(a.phase_psnr, 3),
                _fmt(a.dice, 3),
                _fmt(a.velocity_coefficient, 3),
            ]
        )
    if len(rows) == 1:
        return "(no ablation rows)\n"
    return _align(rows)
