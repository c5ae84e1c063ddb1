"""Global myocardial velocity curves and the velocity coefficient.

In-plane vectors use (x, y) = (column, row) components. The radial unit vector
points away from the per-frame myocardium centroid; the circumferential unit
vector is its counterclockwise rotation (x, y) -> (-y, x).
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np

from mvmsynth.errors import DegenerateError, ShapeError
from mvmsynth.metrics import pearson
from mvmsynth.models.series import MVMSeries
from mvmsynth.models.velocity import CURVE_DIRECTIONS, VelocityCurves

log = logging.getLogger("mvmsynth.velocity")

CENTROID_EXCLUSION_PX = 0.5


def myocardium_centroid(mask: np.ndarray) -> tuple[float, float]:
    """Mean (row, col) of foreground pixels."""
    rows, cols = np.nonzero(np.asarray(mask) > 0.5)
    if rows.size == 0:
        raise DegenerateError("centroid of an empty mask is undefined")
    return float(rows.mean()), float(cols.mean())


def decompose_velocity(
    phase_frame: np.ndarray,
    mask: np.ndarray,
    venc: tuple[float, float, float],
    spacing: tuple[float, float],
) -> tuple[float, float, float]:
    """Mean (longitudinal, radial, circumferential) velocity over the mask, mm/s.

    ``spacing`` is (row, col) in mm. Pixels closer than half a pixel to the
    centroid are left out of the in-plane means.
    """
    phase = np.asarray(phase_frame, dtype=np.float64)
    fg = np.asarray(mask) > 0.5
    if phase.shape[0] != 3 or phase.shape[1:] != fg.shape:
        raise ShapeError(f"phase {phase.shape} does not match mask {fg.shape}")
    cy, cx = myocardium_centroid(fg)
    rows, cols = np.nonzero(fg)
    vel = phase[:, rows, cols] * np.asarray(venc, dtype=np.float64).reshape(3, 1)
    v_l = float(vel[2].mean())

    dist_px = np.hypot(rows - cy, cols - cx)
    keep = dist_px >= CENTROID_EXCLUSION_PX
    if not keep.any():
        raise DegenerateError("mask lies entirely within the centroid exclusion radius")
    sy, sx = spacing
    dx = (cols[keep] - cx) * sx
    dy = (rows[keep] - cy) * sy
    norm = np.hypot(dx, dy)
    rx, ry = dx / norm, dy / norm
    vx, vy = vel[0, keep], vel[1, keep]
    v_r = float(np.mean(vx * rx + vy * ry))
    v_c = float(np.mean(-vx * ry + vy * rx))
    return v_l, v_r, v_c


def velocity_curves(series: MVMSeries, masks: np.ndarray | None = None) -> VelocityCurves:
    """Per-frame decomposition; frames whose mask fails are NaN and listed in ``frame_errors``."""
    masks = series.mask if masks is None else np.asarray(masks)
    if masks.shape != series.mask.shape:
        raise ShapeError(f"masks {masks.shape} do not match series {series.mask.shape}")
    T = series.T
    out = np.full((3, T), np.nan)
    errors: dict[int, str] = {}
    for t in range(T):
        try:
            out[:, t] = decompose_velocity(
                series.phase[t], masks[t], series.venc_mm_per_s, series.pixel_spacing_mm
            )
        except DegenerateError as ex:
            errors[t] = str(ex)
    if errors:
        log.warning(
            "series %s/%s: %d frame(s) without usable mask, curves invalid",
            series.subject_id,
            series.slice_id,
            len(errors),
        )
    return VelocityCurves(
        longitudinal=out[0], radial=out[1], circumferential=out[2], frame_errors=errors
    )


def velocity_coefficient(pred: VelocityCurves, truth: VelocityCurves) -> float:
    """Mean per-direction Pearson r between predicted and true curves."""
    if pred.T != truth.T:
        raise ShapeError(f"curve lengths differ: {pred.T} vs {truth.T}")
    for name, curves in (("pred", pred), ("truth", truth)):
        if not curves.valid:
            frames = sorted(curves.frame_errors)
            raise DegenerateError(f"{name} curves invalid at frames {frames}")
    rs = [
        pearson(pred.direction(d), truth.direction(d), direction=d) for d in CURVE_DIRECTIONS
    ]
    return float(np.mean(rs))


def curves_to_json(curves: VelocityCurves, path: str | Path | None = None) -> str:
    text = json.dumps(curves.to_dict(), indent=2)
    if path is not None:
        p = Path(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text, encoding="utf-8")
    return text
