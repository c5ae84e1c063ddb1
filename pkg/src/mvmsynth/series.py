"""Validation, resampling and splitting of cine velocity-mapping series."""

from __future__ import annotations

import logging
from collections import defaultdict

import numpy as np
from scipy import ndimage

from mvmsynth.errors import ArgumentError, ValidationError
from mvmsynth.models.series import DatasetSplit, MVMSeries, SeriesRef

log = logging.getLogger("mvmsynth.series")

MIN_SIDE = 32


def validate_series(series: MVMSeries) -> MVMSeries:
    """Check every MVMSeries invariant, raising ValidationError naming the field.

    Frames with an empty mask do not fail validation; they mark the series
    degenerate (logged once).
    """
    mag, phase, mask = series.magnitude, series.phase, series.mask
    if mag.ndim != 3:
        raise ValidationError(f"magnitude must be [T,H,W], got {mag.shape}", field="magnitude")
    T, H, W = mag.shape
    if T < 1:
        raise ValidationError("series has no frames", field="magnitude")
    if H < MIN_SIDE or W < MIN_SIDE:
        raise ValidationError(f"H and W must be >= {MIN_SIDE}, got {H}x{W}", field="magnitude")
    if phase.shape != (T, 3, H, W):
        raise ValidationError(
            f"phase must be {(T, 3, H, W)}, got {phase.shape}", field="phase"
        )
    if mask.shape != (T, H, W):
        raise ValidationError(f"mask must be {(T, H, W)}, got {mask.shape}", field="mask")
    for name, arr, lo, hi in (("magnitude", mag, 0.0, 1.0), ("phase", phase, -1.0, 1.0)):
        if not np.all(np.isfinite(arr)):
            raise ValidationError(f"{name} contains non-finite values", field=name)
        amin, amax = float(arr.min()), float(arr.max())
        if amin < lo or amax > hi:
            raise ValidationError(
                f"{name} values must lie in [{lo}, {hi}], got [{amin:.4g}, {amax:.4g}]",
                field=name,
            )
    if not np.all((mask == 0) | (mask == 1)):
        raise ValidationError("mask must be binary", field="mask")
    if len(series.pixel_spacing_mm) != 2 or min(series.pixel_spacing_mm) <= 0:
        raise ValidationError("pixel spacing must be two positive reals", field="pixel_spacing_mm")
    if len(series.venc_mm_per_s) != 3 or min(series.venc_mm_per_s) <= 0:
        raise ValidationError("venc must be three positive reals", field="venc_mm_per_s")
    if series.degenerate:
        log.warning(
            "series %s/%s is degenerate: empty mask in frames %s",
            series.subject_id,
            series.slice_id,
            series.degenerate_frames,
        )
    return series


def resample_bilinear(series: MVMSeries, factor: int) -> MVMSeries:
    """Upsample in-plane by an integer factor.

    Bilinear for magnitude and phase (pixel-centre aligned, edge clamped),
    nearest neighbour for the mask; spacing is divided by ``factor``.
    """
    if not isinstance(factor, (int, np.integer)) or factor < 1:
        raise ArgumentError(f"factor must be a positive integer, got {factor!r}")
    factor = int(factor)
    if factor == 1:
        return series.model_copy(deep=True)

    def _zoom(arr: np.ndarray, order: int) -> np.ndarray:
        zoom = (1.0,) * (arr.ndim - 2) + (float(factor), float(factor))
        out = ndimage.zoom(
            arr.astype(np.float64), zoom, order=order, mode="nearest", grid_mode=True
        )
        return out.astype(np.float32)

    mag = np.clip(_zoom(series.magnitude, 1), series.magnitude.min(), series.magnitude.max())
    phase = np.clip(_zoom(series.phase, 1), series.phase.min(), series.phase.max())
    mask = (_zoom(series.mask, 0) > 0.5).astype(np.float32)
    dy, dx = series.pixel_spacing_mm
    return MVMSeries(
        subject_id=series.subject_id,
        slice_id=series.slice_id,
        magnitude=mag,
        phase=phase,
        mask=mask,
        pixel_spacing_mm=(dy / factor, dx / factor),
        venc_mm_per_s=series.venc_mm_per_s,
    )


def make_split(
    refs: list[SeriesRef], n_train: int, n_val: int, n_test: int, *, seed: int = 0
) -> DatasetSplit:
    """Assign whole subjects (all their slices) to train / val / test."""
    by_subject: dict[str, list[SeriesRef]] = defaultdict(list)
    for r in refs:
        by_subject[r.subject_id].append(r)
    subjects = sorted(by_subject)
    if n_train + n_val + n_test > len(subjects):
        raise ArgumentError(
            f"requested {n_train + n_val + n_test} subjects but only {len(subjects)} available"
        )
    order = np.random.default_rng(seed).permutation(len(subjects))
    picked = [subjects[i] for i in order]
    parts = (
        picked[:n_train],
        picked[n_train : n_train + n_val],
        picked[n_train + n_val : n_train + n_val + n_test],
    )

    def _refs(names: list[str]) -> list[SeriesRef]:
        return [r for s in sorted(names) for r in sorted(by_subject[s], key=lambda x: x.slice_id)]

    return DatasetSplit(train=_refs(parts[0]), val=_refs(parts[1]), test=_refs(parts[2]))
