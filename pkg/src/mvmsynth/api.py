"""High-level entry points: evaluation of models and baselines, ablation runs, reconstruction."""

from __future__ import annotations

import logging
from collections.abc import Callable, Iterable
from pathlib import Path

import numpy as np

from mvmsynth.baselines import BASELINE_METHODS, baseline_synthesize
from mvmsynth.errors import ArgumentError, DegenerateError, MvmError
from mvmsynth.io.archive import load_series
from mvmsynth.logging import Timer, log_duration
from mvmsynth.metrics import build_metric_report, evaluate_prediction
from mvmsynth.models.experiment import (
    AblationResult,
    EvalConfig,
    ExperimentReport,
    MethodResult,
    TrainConfig,
)
from mvmsynth.models.network import AblationRow, Checkpoint
from mvmsynth.models.sample import SynthesisSample
from mvmsynth.models.series import DatasetSplit, MVMSeries
from mvmsynth.network.ablation import configure_ablation
from mvmsynth.network.unet import MultiTaskAttentionUNet, from_checkpoint, predict_sample
from mvmsynth.sampling import enumerate_samples, make_sample, reconstruct_plan
from mvmsynth.training import train
from mvmsynth.utils import config_hash, dataset_hash, series_fingerprint
from mvmsynth.velocity import velocity_coefficient, velocity_curves

log = logging.getLogger("mvmsynth.api")

METHODS: tuple[str, ...] = (*BASELINE_METHODS, "model")

# (mag [1,H,W], phase [3,H,W], mask_prob [1,H,W] or None)
Prediction = tuple[np.ndarray, np.ndarray, np.ndarray | None]
Predictor = Callable[[SynthesisSample], Prediction]


def _predictor(method: str, eval_cfg: EvalConfig, net: MultiTaskAttentionUNet | None) -> Predictor:
    if method == "model":
        if net is None:
            raise ArgumentError("method 'model' needs a checkpoint")
        model = net
        return lambda s: predict_sample(model, s)
    if method in BASELINE_METHODS:

        def run(s: SynthesisSample) -> Prediction:
            mag, phase = baseline_synthesize(s, method, eval_cfg.hs)
            return mag, phase, None

        return run
    raise ArgumentError(f"unknown method {method!r}; expected one of {METHODS}")


# ─────────────────────────────────────────────────────────────────────────────
# Reconstruction
# ─────────────────────────────────────────────────────────────────────────────


def reconstruct_series(
    series: MVMSeries,
    predict: Predictor,
    *,
    cache: dict[tuple[int, int], Prediction] | None = None,
    mask_threshold: float = 0.5,
) -> MVMSeries:
    """Full-length series: ground-truth anchors, synthesized frames everywhere else.

    Frames whose predictor returns no mask keep the ground-truth mask.
    """
    cache = {} if cache is None else cache
    magnitude = series.magnitude.copy()
    phase = series.phase.copy()
    mask = series.mask.copy()
    for src in reconstruct_plan(series.T):
        if src.kind == "anchor":
            continue
        key = (src.tau, src.k)
        if key not in cache:
            cache[key] = predict(make_sample(series, src.tau, src.k))
        mag_p, phase_p, mask_p = cache[key]
        magnitude[src.frame] = mag_p[0]
        phase[src.frame] = phase_p
        if mask_p is not None:
            mask[src.frame] = (mask_p[0] >= mask_threshold).astype(np.float32)
    return series.model_copy(update={"magnitude": magnitude, "phase": phase, "mask": mask})


# ─────────────────────────────────────────────────────────────────────────────
# Evaluation
# ─────────────────────────────────────────────────────────────────────────────


def _evaluate_method(
    method: str,
    predict: Predictor,
    test_series: list[MVMSeries],
    eval_cfg: EvalConfig,
) -> MethodResult:
    samples = []
    failures: list[str] = []
    per_series: dict[str, float | None] = {}
    for series in test_series:
        name = f"{series.subject_id}/{series.slice_id}"
        cache: dict[tuple[int, int], Prediction] = {}
        for sample in enumerate_samples(series):
            try:
                pred = predict(sample)
                cache[(sample.tau, sample.k)] = pred
                samples.append(
                    evaluate_prediction(
                        sample.key,
                        pred[0],
                        pred[1],
                        sample.mag_target,
                        sample.phase_target,
                        pred[2],
                        sample.mask_target,
                        threshold=eval_cfg.mask_threshold,
                    )
                )
            except MvmError as ex:
                log.warning("%s: sample %s failed: %s", method, sample.key, ex)
                failures.append(f"{sample.key}: {type(ex).__name__}: {ex}")
        per_series[name] = _series_velocity(method, series, predict, cache, eval_cfg, failures)
    metrics = build_metric_report(samples, velocity_per_series=per_series, failures=failures)
    log.info(
        "%s: %d samples, %d failures, mag psnr=%s phase psnr=%s",
        method,
        len(samples),
        len(failures),
        metrics.value("magnitude.psnr"),
        metrics.value("phase.psnr"),
    )
    return MethodResult(method=method, metrics=metrics)


def _series_velocity(
    method: str,
    series: MVMSeries,
    predict: Predictor,
    cache: dict[tuple[int, int], Prediction],
    eval_cfg: EvalConfig,
    failures: list[str],
) -> float | None:
    name = f"{series.subject_id}/{series.slice_id}"
    try:
        recon = reconstruct_series(
            series, predict, cache=cache, mask_threshold=eval_cfg.mask_threshold
        )
        masks = series.mask if eval_cfg.use_gt_masks else recon.mask
        return velocity_coefficient(velocity_curves(recon, masks), velocity_curves(series))
    except DegenerateError as ex:
        log.warning("%s: velocity coefficient for %s undefined: %s", method, name, ex)
        failures.append(f"{name}: velocity: {ex}")
    except MvmError as ex:
        log.warning("%s: reconstruction of %s failed: %s", method, name, ex)
        failures.append(f"{name}: reconstruction: {type(ex).__name__}: {ex}")
    return None


def _test_series(data: DatasetSplit | Iterable[MVMSeries]) -> tuple[list[MVMSeries], str]:
    if isinstance(data, DatasetSplit):
        series = [load_series(ref.path) for ref in data.test]
        return series, dataset_hash([Path(ref.path) for ref in data.test])
    series = list(data)
    fingerprint = series_fingerprint(
        [(f"{s.subject_id}/{s.slice_id}", [s.magnitude, s.phase, s.mask]) for s in series]
    )
    return series, fingerprint


def evaluate(
    checkpoint: Checkpoint | None,
    data: DatasetSplit | Iterable[MVMSeries],
    methods: Iterable[str] | None = None,
    eval_cfg: EvalConfig | None = None,
) -> ExperimentReport:
    """Score methods on the test series: per-sample quality, Dice and velocity coefficients.

    ``data`` is a split (its ``test`` part is used) or a list of series.
    Per-sample failures are recorded in each method's report, never raised.
    """
    eval_cfg = eval_cfg or EvalConfig()
    chosen = list(methods) if methods is not None else list(eval_cfg.methods)
    unknown = [m for m in chosen if m not in METHODS]
    if unknown:
        raise ArgumentError(f"unknown method(s) {unknown}; expected a subset of {METHODS}")
    test_series, data_hash = _test_series(data)
    if not test_series:
        raise ArgumentError("evaluation needs at least one test series")

    net = None
    if "model" in chosen:
        if checkpoint is None:
            raise ArgumentError("method 'model' needs a checkpoint")
        net = from_checkpoint(checkpoint)
        net.eval()

    ordered = [m for m in METHODS if m in chosen]
    what = f"evaluation of {', '.join(ordered)} on {len(test_series)} series"
    with log_duration(log, what) as clock:
        results = [
            _evaluate_method(m, _predictor(m, eval_cfg, net), test_series, eval_cfg)
            for m in ordered
        ]
    hash_payload = {"eval": eval_cfg.model_dump(mode="json")}
    if checkpoint is not None:
        hash_payload["net"] = checkpoint.config.model_dump(mode="json")
    coefficients: dict[str, float | None] = {}
    for r in results:
        agg = r.metrics.velocity_coefficient
        coefficients[r.method] = None if agg is None else agg.mean
    return ExperimentReport(
        methods=results,
        velocity_coefficients=coefficients,
        wall_clock_s=clock.elapsed,
        config_hash=config_hash(hash_payload),
        dataset_hash=data_hash,
        seed=checkpoint.metadata.seed if checkpoint is not None else 0,
    )


# ─────────────────────────────────────────────────────────────────────────────
# Ablations
# ─────────────────────────────────────────────────────────────────────────────


def run_ablations(
    base: TrainConfig,
    split: DatasetSplit | None = None,
    *,
    train_series: list[MVMSeries] | None = None,
    val_series: list[MVMSeries] | None = None,
    test_series: list[MVMSeries] | None = None,
    eval_cfg: EvalConfig | None = None,
    rows: Iterable[AblationRow | str] = tuple(AblationRow),
) -> ExperimentReport:
    """Train and evaluate every ablation row with the same seed and data."""
    clock = Timer()
    if train_series is None:
        if split is None:
            raise ArgumentError("run_ablations needs a split or explicit series lists")
        train_series = [load_series(r.path) for r in split.train]
        val_series = [load_series(r.path) for r in split.val]
    test_data: DatasetSplit | list[MVMSeries]
    if test_series is not None:
        test_data = test_series
    elif split is not None:
        # load once, reuse for every row
        test_data = [load_series(r.path) for r in split.test]
    else:
        raise ArgumentError("run_ablations needs test series")
    _, data_hash = _test_series(test_data)

    results: list[AblationResult] = []
    for row in map(AblationRow, rows):
        net_cfg, loss_cfg = configure_ablation(row, base.net, base.loss)
        cfg = base.model_copy(update={"net": net_cfg, "loss": loss_cfg})
        with log_duration(log, f"ablation {row.value}: training"):
            ckpt = train(cfg, train_series=train_series, val_series=val_series)
        report = evaluate(ckpt, test_data, ["model"], eval_cfg)
        metrics = report.methods[0].metrics
        results.append(
            AblationResult(
                row=row.value,
                independent_encoders=net_cfg.independent_encoders,
                independent_decoders=net_cfg.independent_decoders,
                shared_bottleneck=net_cfg.shared_bottleneck,
                weighted_loss=loss_cfg.weighted,
                magnitude_psnr=metrics.value("magnitude.psnr"),
                phase_psnr=metrics.value("phase.psnr"),
                dice=metrics.value("dice"),
                velocity_coefficient=report.velocity_coefficients.get("model"),
                config_hash=config_hash(cfg),
            )
        )
    return ExperimentReport(
        ablations=results,
        wall_clock_s=clock.elapsed,
        config_hash=config_hash(base),
        dataset_hash=data_hash,
        seed=base.seed,
    )
