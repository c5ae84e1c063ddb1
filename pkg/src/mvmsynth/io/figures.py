"""PNG panels: magnitude strip, contour overlay, phase triptych, velocity curves."""

from __future__ import annotations

import logging
from functools import partial
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from mvmsynth.api import Predictor, reconstruct_series  # noqa: E402
from mvmsynth.baselines import baseline_synthesize  # noqa: E402
from mvmsynth.errors import ReportError  # noqa: E402
from mvmsynth.models.experiment import EvalConfig, ExperimentReport  # noqa: E402
from mvmsynth.models.network import Checkpoint  # noqa: E402
from mvmsynth.models.sample import ANCHOR_GAP, SynthesisSample  # noqa: E402
from mvmsynth.models.series import DIRECTIONS, MVMSeries  # noqa: E402
from mvmsynth.models.velocity import CURVE_DIRECTIONS, VelocityCurves  # noqa: E402
from mvmsynth.network.unet import from_checkpoint, predict_sample  # noqa: E402
from mvmsynth.sampling import K_VALUES, make_sample  # noqa: E402
from mvmsynth.utils import slug  # noqa: E402
from mvmsynth.velocity import velocity_curves  # noqa: E402

log = logging.getLogger("mvmsynth.figures")

DPI = 120


def mask_difference(gt: np.ndarray, pred: np.ndarray) -> np.ndarray:
    """Pixels where exactly one of the two binary masks is set."""
    a = np.asarray(gt).reshape(np.asarray(gt).shape[-2:]) > 0.5
    b = np.asarray(pred).reshape(np.asarray(pred).shape[-2:]) > 0.5
    return np.logical_xor(a, b)


def _linear_predict(s: SynthesisSample) -> tuple[np.ndarray, np.ndarray, np.ndarray | None]:
    mag, phase = baseline_synthesize(s, "linear")
    return mag, phase, None


def _save(fig: plt.Figure, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=DPI, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_magnitude_strip(
    samples: list[SynthesisSample], preds: list[np.ndarray], path: Path
) -> Path:
    """Top row synthesized, bottom row ground truth: anchor, k = 1..3, anchor."""
    first = samples[0]
    gt = [first.mag_in[0]] + [s.mag_target[0] for s in samples] + [first.mag_in[1]]
    syn = [first.mag_in[0]] + [p[0] for p in preds] + [first.mag_in[1]]
    titles = [f"t={first.tau}"] + [f"t={s.target_index}" for s in samples] + [
        f"t={first.tau + ANCHOR_GAP}"
    ]
    fig, axes = plt.subplots(2, len(gt), figsize=(2.4 * len(gt), 5))
    for c in range(len(gt)):
        for r, row in enumerate((syn, gt)):
            ax = axes[r, c]
            ax.imshow(row[c], cmap="gray", vmin=0.0, vmax=1.0)
            ax.set_xticks([])
            ax.set_yticks([])
            if r == 0:
                ax.set_title(titles[c])
    axes[0, 0].set_ylabel("synthesized")
    axes[1, 0].set_ylabel("ground truth")
    return _save(fig, path)


def plot_contour_overlay(
    magnitude: np.ndarray, mask_gt: np.ndarray, mask_pred: np.ndarray, path: Path
) -> Path:
    """Ground truth, prediction and their difference over the magnitude image."""
    gt = np.asarray(mask_gt).reshape(magnitude.shape) > 0.5
    pred = np.asarray(mask_pred).reshape(magnitude.shape) > 0.5
    diff = mask_difference(gt, pred)
    fig, axes = plt.subplots(1, 3, figsize=(11, 4))
    titles = ("ground truth", "prediction", f"difference ({int(diff.sum())} px)")
    for ax, title in zip(axes, titles):
        ax.imshow(magnitude, cmap="gray", vmin=0.0, vmax=1.0)
        ax.set_title(title)
        ax.set_xticks([])
        ax.set_yticks([])
    if gt.any() and not gt.all():
        axes[0].contour(gt, levels=[0.5], colors="lime", linewidths=1.0)
    if pred.any() and not pred.all():
        axes[1].contour(pred, levels=[0.5], colors="red", linewidths=1.0)
    overlay = np.zeros((*diff.shape, 4))
    overlay[diff] = (1.0, 0.9, 0.0, 0.9)
    axes[2].imshow(overlay)
    return _save(fig, path)


def plot_phase_triptych(phase_gt: np.ndarray, phase_pred: np.ndarray, path: Path) -> Path:
    """Per direction: ground truth, synthesized, absolute error."""
    fig, axes = plt.subplots(3, 3, figsize=(9, 9))
    for r, d in enumerate(DIRECTIONS):
        err = np.abs(phase_pred[r] - phase_gt[r])
        panels = ((phase_gt[r], "bwr", -1, 1), (phase_pred[r], "bwr", -1, 1), (err, "magma", 0, 1))
        for c, (img, cmap, lo, hi) in enumerate(panels):
            ax = axes[r, c]
            ax.imshow(img, cmap=cmap, vmin=lo, vmax=hi)
            ax.set_xticks([])
            ax.set_yticks([])
            if r == 0:
                ax.set_title(("ground truth", "synthesized", "|error|")[c])
        axes[r, 0].set_ylabel(f"phase {d}")
    return _save(fig, path)


def plot_velocity_curves(
    truth: VelocityCurves, path: Path, pred: VelocityCurves | None = None
) -> Path:
    fig, axes = plt.subplots(1, 3, figsize=(13, 3.6))
    frames = np.arange(truth.T)
    for ax, d in zip(axes, CURVE_DIRECTIONS):
        ax.plot(frames, truth.direction(d), color="black", label="truth")
        if pred is not None:
            ax.plot(frames, pred.direction(d), color="tab:red", linestyle="--", label="predicted")
        ax.set_title(d)
        ax.set_xlabel("frame")
        ax.set_ylabel(truth.units)
        ax.axhline(0.0, color="grey", linewidth=0.5)
    axes[0].legend(loc="best")
    fig.tight_layout()
    return _save(fig, path)


def emit_figures(
    report: ExperimentReport,
    series: MVMSeries,
    checkpoint: Checkpoint | None,
    out_dir: str | Path,
    *,
    tau: int = 0,
    eval_cfg: EvalConfig | None = None,
) -> list[Path]:
    """Write the four panel figures for one series; returns the file paths.

    Predictions come from the checkpoint when given, else from linear interpolation.
    """
    if report.is_empty:
        raise ReportError("empty report: nothing to illustrate")
    eval_cfg = eval_cfg or EvalConfig()
    out = Path(out_dir)
    stem = slug(f"{series.subject_id}-{series.slice_id}")

    predict: Predictor = _linear_predict
    if checkpoint is not None:
        net = from_checkpoint(checkpoint)
        net.eval()
        predict = partial(predict_sample, net)

    samples = [make_sample(series, tau, k) for k in K_VALUES]
    preds = [predict(s) for s in samples]
    mid = samples[1]
    _, phase_mid, mask_mid = preds[1]
    mask_pred = (
        mid.mask_target
        if mask_mid is None
        else (mask_mid >= eval_cfg.mask_threshold).astype(np.float32)
    )

    paths = [
        plot_magnitude_strip(samples, [p[0] for p in preds], out / f"{stem}_magnitude.png"),
        plot_contour_overlay(
            mid.mag_target[0], mid.mask_target, mask_pred, out / f"{stem}_contours.png"
        ),
        plot_phase_triptych(mid.phase_target, phase_mid, out / f"{stem}_phase.png"),
    ]
    recon = reconstruct_series(series, predict, mask_threshold=eval_cfg.mask_threshold)
    masks = series.mask if eval_cfg.use_gt_masks else recon.mask
    paths.append(
        plot_velocity_curves(
            velocity_curves(series), out / f"{stem}_velocity.png", velocity_curves(recon, masks)
        )
    )
    log.info("wrote %d figures to %s", len(paths), out)
    return paths
