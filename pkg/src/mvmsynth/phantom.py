"""Analytic contracting-twisting annulus phantom with closed-form velocity curves.

Motion model (time ``t`` in frames, ``dt = frame_interval_s``)::

    s(t)     = 1 - a * sin(2*pi*t/T)                  radii scale
    theta(t) = twist * sin(2*pi*t/T)                  rotation angle
    v_inplane(p) = s'(t) * (p - c) + theta'(t) * rot90(p - c)   (mm, on the annulus)
    v_z      = A * sin(2*pi*t/T)                      uniform on the annulus

In-plane vectors use (x, y) = (column, row) components; ``rot90`` maps
(x, y) to (-y, x).
"""

from __future__ import annotations

import logging
import math
from pathlib import Path

import numpy as np

from mvmsynth.errors import ArgumentError
from mvmsynth.models.phantom import PhantomConfig
from mvmsynth.models.series import DatasetSplit, MVMSeries, SeriesRef
from mvmsynth.models.velocity import VelocityCurves
from mvmsynth.series import validate_series

log = logging.getLogger("mvmsynth.phantom")

MYOCARDIUM_INTENSITY = 0.8
BLOOD_POOL_INTENSITY = 0.4
MARGIN_PX = 4


def check_config(cfg: PhantomConfig) -> PhantomConfig:
    """Raise ArgumentError when the annulus geometry is impossible."""
    if cfg.endo_radius_mm >= cfg.epi_radius_mm:
        raise ArgumentError("endo_radius_mm must be smaller than epi_radius_mm")
    if cfg.endo_radius_mm * (1.0 - cfg.radial_amplitude) <= 0:
        raise ArgumentError("radial_amplitude collapses the cavity at peak contraction")
    cy, cx = cfg.resolved_center()
    sy, sx = cfg.pixel_spacing_mm
    if sy <= 0 or sx <= 0 or min(cfg.venc_mm_per_s) <= 0:
        raise ArgumentError("pixel spacing and venc must be positive")
    peak = cfg.epi_radius_mm * (1.0 + cfg.radial_amplitude)
    ry, rx = peak / sy, peak / sx
    if (
        cy - ry < MARGIN_PX
        or cy + ry > cfg.H - 1 - MARGIN_PX
        or cx - rx < MARGIN_PX
        or cx + rx > cfg.W - 1 - MARGIN_PX
    ):
        raise ArgumentError(
            f"annulus (peak radius {peak:.1f} mm) does not fit a {cfg.H}x{cfg.W} image "
            f"with a {MARGIN_PX} px margin"
        )
    return cfg


def _motion(cfg: PhantomConfig, t: float) -> tuple[float, float, float, float]:
    """Return (s, ds/dt, dtheta/dt, v_long) at frame ``t``."""
    w = 2.0 * math.pi / cfg.T
    rate = w / cfg.frame_interval_s
    s = 1.0 - cfg.radial_amplitude * math.sin(w * t)
    ds = -cfg.radial_amplitude * rate * math.cos(w * t)
    dtheta = cfg.twist_amplitude_rad * rate * math.cos(w * t)
    v_long = cfg.longitudinal_amplitude_mm_per_s * math.sin(w * t)
    return s, ds, dtheta, v_long


def generate_phantom(cfg: PhantomConfig) -> MVMSeries:
    """Render magnitude, three-direction phase and masks for one cycle."""
    check_config(cfg)
    rng = np.random.default_rng(cfg.seed)
    cy, cx = cfg.resolved_center()
    sy, sx = cfg.pixel_spacing_mm
    yy, xx = np.mgrid[0 : cfg.H, 0 : cfg.W].astype(np.float64)
    dy_mm = (yy - cy) * sy
    dx_mm = (xx - cx) * sx
    r_mm = np.hypot(dx_mm, dy_mm)
    venc = np.asarray(cfg.venc_mm_per_s, dtype=np.float64).reshape(3, 1, 1)

    magnitude = np.empty((cfg.T, cfg.H, cfg.W), dtype=np.float32)
    phase = np.empty((cfg.T, 3, cfg.H, cfg.W), dtype=np.float32)
    mask = np.empty((cfg.T, cfg.H, cfg.W), dtype=np.float32)
    for t in range(cfg.T):
        s, ds, dtheta, v_long = _motion(cfg, t)
        annulus = (r_mm >= cfg.endo_radius_mm * s) & (r_mm <= cfg.epi_radius_mm * s)
        pool = r_mm < cfg.endo_radius_mm * s

        vel = np.zeros((3, cfg.H, cfg.W))
        vel[0] = np.where(annulus, ds * dx_mm - dtheta * dy_mm, 0.0)
        vel[1] = np.where(annulus, ds * dy_mm + dtheta * dx_mm, 0.0)
        vel[2] = np.where(annulus, v_long, 0.0)
        ph = np.clip(vel / venc, -1.0, 1.0)
        if cfg.noise_sigma > 0:
            ph = np.clip(ph + rng.normal(0.0, cfg.noise_sigma, size=ph.shape), -1.0, 1.0)

        mag = np.where(annulus, MYOCARDIUM_INTENSITY, np.where(pool, BLOOD_POOL_INTENSITY, 0.0))
        if cfg.noise_sigma > 0:
            background = np.abs(rng.normal(0.0, cfg.noise_sigma, size=mag.shape))
            mag = np.where(annulus | pool, mag, np.clip(background, 0.0, 1.0))

        magnitude[t] = mag
        phase[t] = ph
        mask[t] = annulus
    series = MVMSeries(
        subject_id=cfg.subject_id,
        slice_id=cfg.slice_id,
        magnitude=magnitude,
        phase=phase,
        mask=mask,
        pixel_spacing_mm=cfg.pixel_spacing_mm,
        venc_mm_per_s=cfg.venc_mm_per_s,
    )
    return validate_series(series)


def annulus_mean_radius_mm(cfg: PhantomConfig, s: float = 1.0) -> float:
    """Area-weighted mean radius of the (scaled) annulus."""
    ri, re = cfg.endo_radius_mm * s, cfg.epi_radius_mm * s
    return (2.0 / 3.0) * (re**3 - ri**3) / (re**2 - ri**2)


def analytic_velocity_curves(cfg: PhantomConfig) -> VelocityCurves:
    """Closed-form per-frame mean velocities over the continuous annulus."""
    check_config(cfg)
    lon, rad, circ = (np.zeros(cfg.T) for _ in range(3))
    for t in range(cfg.T):
        s, ds, dtheta, v_long = _motion(cfg, t)
        mean_r = annulus_mean_radius_mm(cfg, s)
        lon[t] = v_long
        rad[t] = ds * mean_r
        circ[t] = dtheta * mean_r
    return VelocityCurves(longitudinal=lon, radial=rad, circumferential=circ)


def generate_phantom_dataset(
    base: PhantomConfig,
    out_dir: str | Path,
    *,
    n_train: int = 20,
    n_val: int = 5,
    n_test: int = 5,
    slices_per_subject: int = 1,
    seed: int = 0,
    jitter: float = 0.2,
) -> DatasetSplit:
    """Write one archive per (subject, slice) and a subject-disjoint ``split.json``.

    Motion amplitudes are jittered per subject by up to ``jitter`` (relative);
    slices shrink towards the apex by 8% each.
    """
    from mvmsynth.io.archive import save_series, save_split

    out = Path(out_dir)
    rng = np.random.default_rng(seed)
    n_subjects = n_train + n_val + n_test
    refs: list[SeriesRef] = []
    for i in range(n_subjects):
        subject = f"sub{i:03d}"
        scale = 1.0 + rng.uniform(-jitter, jitter, size=3)
        for j in range(slices_per_subject):
            shrink = 1.0 - 0.08 * j
            cfg = base.model_copy(
                update={
                    "radial_amplitude": min(base.radial_amplitude * scale[0], 0.45),
                    "twist_amplitude_rad": base.twist_amplitude_rad * scale[1],
                    "longitudinal_amplitude_mm_per_s": base.longitudinal_amplitude_mm_per_s
                    * scale[2],
                    "endo_radius_mm": base.endo_radius_mm * shrink,
                    "epi_radius_mm": base.epi_radius_mm * shrink,
                    "seed": int(rng.integers(0, 2**31 - 1)),
                    "subject_id": subject,
                    "slice_id": f"s{j}",
                }
            )
            series = generate_phantom(cfg)
            rel = Path("series") / f"{subject}_s{j}"
            save_series(series, out / rel)
            refs.append(SeriesRef(subject_id=subject, slice_id=f"s{j}", path=rel))
    names = [f"sub{i:03d}" for i in range(n_subjects)]
    split = DatasetSplit(
        train=[r for r in refs if r.subject_id in names[:n_train]],
        val=[r for r in refs if r.subject_id in names[n_train : n_train + n_val]],
        test=[r for r in refs if r.subject_id in names[n_train + n_val :]],
    )
    save_split(split, out / "split.json")
    log.info(
        "phantom dataset: %d train / %d val / %d test series in %s",
        len(split.train),
        len(split.val),
        len(split.test),
        out,
    )
    return split
