"""Tests for the analytic annulus phantom."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from mvmsynth.errors import ArgumentError
from mvmsynth.io.archive import load_series, load_split
from mvmsynth.models.phantom import PhantomConfig
from mvmsynth.models.series import MVMSeries
from mvmsynth.phantom import (
    BLOOD_POOL_INTENSITY,
    MYOCARDIUM_INTENSITY,
    analytic_velocity_curves,
    annulus_mean_radius_mm,
    check_config,
    generate_phantom,
    generate_phantom_dataset,
)


class TestGeneratePhantom:
    """Analytic phantom series."""

    def test_shapes_and_ranges(self, moving_series: MVMSeries) -> None:
        s = moving_series
        assert s.magnitude.shape == (12, 64, 64)
        assert s.phase.shape == (12, 3, 64, 64)
        assert s.magnitude.min() >= 0.0 and s.magnitude.max() <= 1.0
        assert s.phase.min() >= -1.0 and s.phase.max() <= 1.0
        assert set(np.unique(s.mask)) <= {0.0, 1.0}

    def test_intensities_without_noise(self, moving_series: MVMSeries) -> None:
        """Test tissue intensities of a noise-free phantom."""
        s = moving_series
        assert np.allclose(s.magnitude[s.mask == 1.0], MYOCARDIUM_INTENSITY)
        assert np.isclose(s.magnitude[0, 32, 32], BLOOD_POOL_INTENSITY)
        assert s.magnitude[0, 0, 0] == 0.0

    def test_same_seed_is_deterministic(self) -> None:
        cfg = PhantomConfig(T=6, noise_sigma=0.05, seed=11)
        assert generate_phantom(cfg) == generate_phantom(cfg)

    def test_seed_changes_noise(self) -> None:
        a = generate_phantom(PhantomConfig(T=6, noise_sigma=0.05, seed=1))
        b = generate_phantom(PhantomConfig(T=6, noise_sigma=0.05, seed=2))
        assert a != b

    def test_static_phantom_has_constant_frames(self, static_series: MVMSeries) -> None:
        """Test that zero motion amplitudes give identical frames."""
        s = static_series
        for t in range(1, s.T):
            np.testing.assert_array_equal(s.magnitude[t], s.magnitude[0])
            np.testing.assert_array_equal(s.mask[t], s.mask[0])
        assert np.all(s.phase == 0.0)

    def test_mask_is_an_annulus(self, moving_series: MVMSeries) -> None:
        mask = moving_series.mask[0]
        assert mask[32, 32] == 0.0
        # 20 mm from the centre at 1.7 mm / px sits inside the 15-25 mm wall
        assert mask[32, 32 + 12] == 1.0

    def test_radial_velocity_at_first_frame(self) -> None:
        """Test the encoded phase against the closed-form radial velocity."""
        cfg = PhantomConfig(
            T=20, noise_sigma=0.0, twist_amplitude_rad=0.0, venc_mm_per_s=(10.0, 10.0, 10.0)
        )
        s = generate_phantom(cfg)
        rows, cols = np.nonzero(s.mask[0])
        cy, cx = cfg.resolved_center()
        dy, dx = (rows - cy) * 1.7, (cols - cx) * 1.7
        r = np.hypot(dx, dy)
        vx = s.phase[0, 0, rows, cols] * 10.0
        vy = s.phase[0, 1, rows, cols] * 10.0
        measured = float(np.mean((vx * dx + vy * dy) / r))
        ds = -cfg.radial_amplitude * 2.0 * np.pi / cfg.T
        expected = ds * annulus_mean_radius_mm(cfg)
        assert measured == pytest.approx(expected, rel=0.02)


class TestCheckConfig:
    """Geometry checks on phantom configs."""

    def test_inverted_radii(self) -> None:
        with pytest.raises(ArgumentError):
            check_config(PhantomConfig(endo_radius_mm=30.0, epi_radius_mm=25.0))

    def test_annulus_must_fit(self) -> None:
        with pytest.raises(ArgumentError, match="does not fit"):
            check_config(PhantomConfig(H=32, W=32))

    def test_default_fits(self) -> None:
        cfg = PhantomConfig()
        assert check_config(cfg) is cfg


class TestAnalyticCurves:
    """Closed-form global velocity curves."""

    def test_length_and_phase(self) -> None:
        cfg = PhantomConfig(T=16)
        curves = analytic_velocity_curves(cfg)
        assert curves.T == 16
        assert curves.valid
        assert curves.longitudinal[0] == pytest.approx(0.0)
        assert curves.longitudinal[4] == pytest.approx(cfg.longitudinal_amplitude_mm_per_s)
        assert curves.radial[0] < 0.0
        assert curves.circumferential[0] > 0.0

    def test_mean_radius_of_thin_ring(self) -> None:
        cfg = PhantomConfig(endo_radius_mm=19.99, epi_radius_mm=20.01)
        assert annulus_mean_radius_mm(cfg) == pytest.approx(20.0, rel=1e-4)


def test_dataset_split_is_subject_disjoint(tmp_path: Path) -> None:
    """Test that generated datasets never share a subject between parts."""
    base = PhantomConfig(T=6, noise_sigma=0.0)
    split = generate_phantom_dataset(
        base, tmp_path, n_train=3, n_val=1, n_test=2, slices_per_subject=2, seed=4
    )
    assert (len(split.train), len(split.val), len(split.test)) == (6, 2, 4)
    parts = [split.subjects(p) for p in ("train", "val", "test")]
    assert not (parts[0] & parts[1]) and not (parts[0] & parts[2]) and not (parts[1] & parts[2])
    loaded = load_split(tmp_path / "split.json")
    series = load_series(loaded.test[0].path)
    assert series.T == 6
    assert series.subject_id == loaded.test[0].subject_id
