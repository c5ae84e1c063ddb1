"""Classical frame-interpolation baselines: linear blending and Horn-Schunck flow warping."""

from __future__ import annotations

import logging
from typing import Literal

import numpy as np
from scipy import ndimage

from mvmsynth.errors import ArgumentError, NumericError, ShapeError
from mvmsynth.models.flow import FlowField, HSConfig
from mvmsynth.models.sample import ANCHOR_GAP, SynthesisSample

log = logging.getLogger("mvmsynth.baselines")

BaselineMethod = Literal["linear", "hs_flow"]
BASELINE_METHODS: tuple[str, str] = ("linear", "hs_flow")

# 2x2x2 derivative stencils (x along columns, y along rows) and the 3x3 flow average.
_KX = 0.25 * np.array([[-1.0, 1.0], [-1.0, 1.0]])
_KY = 0.25 * np.array([[-1.0, -1.0], [1.0, 1.0]])
_KT = 0.25 * np.ones((2, 2))
_AVG = np.array(
    [[1 / 12, 1 / 6, 1 / 12], [1 / 6, 0.0, 1 / 6], [1 / 12, 1 / 6, 1 / 12]], dtype=np.float64
)


def _weight(k: float | None, t: float | None) -> float:
    if (k is None) == (t is None):
        raise ArgumentError("pass exactly one of k or t")
    if t is None:
        if k not in (1, 2, 3):
            raise ArgumentError(f"k must be one of (1, 2, 3), got {k}")
        return float(k) / ANCHOR_GAP
    if not 0.0 <= t <= 1.0:
        raise ArgumentError(f"t must lie in [0, 1], got {t}")
    return float(t)


def _same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"frame shapes differ: {a.shape} vs {b.shape}")


def linear_interpolate(
    frame_a: np.ndarray, frame_b: np.ndarray, k: int | None = None, *, t: float | None = None
) -> np.ndarray:
    """(1 - k/4) * frame_a + (k/4) * frame_b."""
    a, b = np.asarray(frame_a), np.asarray(frame_b)
    _same_shape(a, b)
    w = _weight(k, t)
    return ((1.0 - w) * a + w * b).astype(a.dtype, copy=False)


def horn_schunck_flow(
    img1: np.ndarray, img2: np.ndarray, cfg: HSConfig | None = None
) -> FlowField:
    """Dense flow img1 -> img2 by Jacobi iteration of the Horn-Schunck equations.

    Images are used as given; scale them to grey levels matching ``cfg.alpha``.
    """
    cfg = cfg or HSConfig()
    im1 = np.asarray(img1, dtype=np.float64)
    im2 = np.asarray(img2, dtype=np.float64)
    _same_shape(im1, im2)
    if im1.ndim != 2:
        raise ShapeError(f"horn_schunck_flow expects 2-D images, got {im1.shape}")
    if not (np.isfinite(im1).all() and np.isfinite(im2).all()):
        raise NumericError("horn_schunck_flow: non-finite input pixels")

    def corr(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
        return ndimage.correlate(img, kernel, mode="nearest")

    ix = corr(im1, _KX) + corr(im2, _KX)
    iy = corr(im1, _KY) + corr(im2, _KY)
    it = corr(im2, _KT) - corr(im1, _KT)
    denom = cfg.alpha**2 + ix**2 + iy**2

    u = np.zeros_like(im1)
    v = np.zeros_like(im1)
    n = 0
    for n in range(1, cfg.iterations + 1):
        u_avg = corr(u, _AVG)
        v_avg = corr(v, _AVG)
        common = (ix * u_avg + iy * v_avg + it) / denom
        u_new = u_avg - ix * common
        v_new = v_avg - iy * common
        delta = float(np.mean(np.abs(u_new - u) + np.abs(v_new - v)))
        u, v = u_new, v_new
        if delta < cfg.stop_tol:
            break
    log.debug("horn-schunck: %d iterations (alpha=%.3g)", n, cfg.alpha)
    return FlowField(u=u, v=v, iterations_run=n)


def _warp(frame: np.ndarray, dy: np.ndarray, dx: np.ndarray) -> np.ndarray:
    """Sample ``frame`` at (row + dy, col + dx), bilinear with edge clamping."""
    H, W = frame.shape
    rows, cols = np.mgrid[0:H, 0:W].astype(np.float64)
    return ndimage.map_coordinates(
        np.asarray(frame, dtype=np.float64), [rows + dy, cols + dx], order=1, mode="nearest"
    )


def flow_interpolate(
    frame_a: np.ndarray,
    frame_b: np.ndarray,
    flow: FlowField,
    k: int | None = None,
    *,
    t: float | None = None,
) -> np.ndarray:
    """(1-t) * a(x - t*flow) + t * b(x + (1-t)*flow) with t = k/4."""
    a, b = np.asarray(frame_a), np.asarray(frame_b)
    _same_shape(a, b)
    if flow.shape != a.shape:
        raise ShapeError(f"flow {flow.shape} does not match frames {a.shape}")
    w = _weight(k, t)
    warped_a = _warp(a, -w * flow.v, -w * flow.u)
    warped_b = _warp(b, (1.0 - w) * flow.v, (1.0 - w) * flow.u)
    return ((1.0 - w) * warped_a + w * warped_b).astype(a.dtype, copy=False)


def baseline_synthesize(
    sample: SynthesisSample, method: BaselineMethod | str, cfg: HSConfig | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Predicted (mag [1,H,W], phase [3,H,W]) for ``sample`` by a classical method.

    hs_flow estimates flow on the magnitude anchors and reuses it for every
    phase channel.
    """
    mag_a, mag_b = sample.mag_in[0], sample.mag_in[1]
    phase_a, phase_b = sample.anchor_phase(0), sample.anchor_phase(1)
    if method == "linear":
        mag = linear_interpolate(mag_a, mag_b, sample.k)
        phase = np.stack([linear_interpolate(phase_a[c], phase_b[c], sample.k) for c in range(3)])
    elif method == "hs_flow":
        cfg = cfg or HSConfig()
        flow = horn_schunck_flow(mag_a * cfg.intensity_scale, mag_b * cfg.intensity_scale, cfg)
        mag = flow_interpolate(mag_a, mag_b, flow, sample.k)
        phase = np.stack(
            [flow_interpolate(phase_a[c], phase_b[c], flow, sample.k) for c in range(3)]
        )
    else:
        raise ArgumentError(
            f"unknown baseline method {method!r}; expected one of {BASELINE_METHODS}"
        )
    return mag[None].astype(np.float32), phase.astype(np.float32)
