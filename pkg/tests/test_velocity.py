"""Tests for centroid-based velocity decomposition and the velocity coefficient."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from mvmsynth.errors import DegenerateError, ShapeError
from mvmsynth.models.phantom import PhantomConfig
from mvmsynth.models.series import MVMSeries
from mvmsynth.models.velocity import VelocityCurves
from mvmsynth.phantom import analytic_velocity_curves, generate_phantom
from mvmsynth.velocity import (
    curves_to_json,
    decompose_velocity,
    myocardium_centroid,
    velocity_coefficient,
    velocity_curves,
)

UNIT = (1.0, 1.0, 1.0)
SPACING = (1.0, 1.0)


def _ring(size: int = 32, inner: float = 5.0, outer: float = 9.0) -> tuple[np.ndarray, ...]:
    """Symmetric ring around pixel (16, 16) plus the unit radial components (x, y)."""
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    dx, dy = xx - 16.0, yy - 16.0
    r = np.hypot(dx, dy)
    mask = ((r >= inner) & (r <= outer)).astype(np.float32)
    with np.errstate(invalid="ignore", divide="ignore"):
        rx, ry = np.nan_to_num(dx / r), np.nan_to_num(dy / r)
    return mask, rx, ry


class TestCentroid:
    """Mask centroids."""

    def test_single_pixel(self) -> None:
        mask = np.zeros((5, 5))
        mask[1, 3] = 1
        assert myocardium_centroid(mask) == (1.0, 3.0)

    def test_ring_is_centred(self) -> None:
        mask, _, _ = _ring()
        cy, cx = myocardium_centroid(mask)
        assert cy == pytest.approx(16.0) and cx == pytest.approx(16.0)

    def test_empty(self) -> None:
        with pytest.raises(DegenerateError):
            myocardium_centroid(np.zeros((4, 4)))


class TestDecompose:
    """Radial and circumferential decomposition of in-plane velocity."""

    def test_radial_field(self) -> None:
        mask, rx, ry = _ring()
        phase = np.stack([0.5 * rx, 0.5 * ry, np.full_like(rx, 0.25)])
        v_l, v_r, v_c = decompose_velocity(phase, mask, UNIT, SPACING)
        assert v_l == pytest.approx(0.25)
        assert v_r == pytest.approx(0.5)
        assert v_c == pytest.approx(0.0, abs=1e-9)

    def test_counterclockwise_rotation(self) -> None:
        """Test that counter-clockwise rotation gives positive circumferential velocity."""
        mask, rx, ry = _ring()
        phase = np.stack([-0.5 * ry, 0.5 * rx, np.zeros_like(rx)])
        _, v_r, v_c = decompose_velocity(phase, mask, UNIT, SPACING)
        assert v_r == pytest.approx(0.0, abs=1e-9)
        assert v_c == pytest.approx(0.5)

    def test_uniform_translation_cancels(self) -> None:
        """Test that a uniform translation averages out on a ring."""
        mask, rx, _ = _ring()
        phase = np.stack([np.full_like(rx, 0.3), np.zeros_like(rx), np.zeros_like(rx)])
        _, v_r, v_c = decompose_velocity(phase, mask, UNIT, SPACING)
        assert v_r == pytest.approx(0.0, abs=1e-9)
        assert v_c == pytest.approx(0.0, abs=1e-9)

    def test_venc_scales_velocity(self) -> None:
        mask, rx, ry = _ring()
        phase = np.stack([0.5 * rx, 0.5 * ry, np.full_like(rx, 0.5)])
        v_l, v_r, _ = decompose_velocity(phase, mask, (4.0, 4.0, 2.0), SPACING)
        assert v_l == pytest.approx(1.0)
        assert v_r == pytest.approx(2.0)

    def test_centroid_pixel_is_excluded(self) -> None:
        """Test that the pixel at the centroid does not contribute a direction."""
        mask = np.zeros((9, 9), dtype=np.float32)
        mask[3:6, 3:6] = 1.0
        phase = np.zeros((3, 9, 9))
        phase[0, 4, 4] = 1.0
        _, v_r, v_c = decompose_velocity(phase, mask, UNIT, SPACING)
        assert v_r == 0.0 and v_c == 0.0

    def test_single_pixel_mask(self) -> None:
        mask = np.zeros((4, 4))
        mask[2, 2] = 1.0
        with pytest.raises(DegenerateError):
            decompose_velocity(np.zeros((3, 4, 4)), mask, UNIT, SPACING)

    def test_rotation_by_90_degrees(self) -> None:
        """Test that rotating images and vectors together keeps v_r and v_c."""
        rng = np.random.default_rng(4)
        yy, xx = np.mgrid[0:40, 0:40].astype(np.float64)
        r = np.hypot((xx - 17.3) / 1.2, yy - 21.6)
        mask = ((r >= 5.0) & (r <= 11.0)).astype(np.float32)
        phase = rng.uniform(-1.0, 1.0, size=(3, 40, 40))
        before = decompose_velocity(phase, mask, UNIT, SPACING)

        # rot90 maps (x, y) to (y, -x), so vectors map the same way
        rotated = np.stack([np.rot90(phase[1]), -np.rot90(phase[0]), np.rot90(phase[2])])
        after = decompose_velocity(rotated, np.rot90(mask), UNIT, SPACING)
        np.testing.assert_allclose(after, before, atol=1e-6)
        assert before[2] != pytest.approx(0.0)

    def test_shape_mismatch(self) -> None:
        with pytest.raises(ShapeError):
            decompose_velocity(np.zeros((3, 4, 4)), np.ones((5, 5)), UNIT, SPACING)


class TestCurves:
    """Global velocity curves of a series."""

    @pytest.fixture
    def oracle_cfg(self) -> PhantomConfig:
        return PhantomConfig(T=50, noise_sigma=0.0, venc_mm_per_s=(10.0, 10.0, 10.0))

    def test_phantom_matches_closed_form(self, oracle_cfg: PhantomConfig) -> None:
        """Test extracted curves against the phantom's closed-form curves."""
        measured = velocity_curves(generate_phantom(oracle_cfg))
        analytic = analytic_velocity_curves(oracle_cfg)
        assert measured.valid
        np.testing.assert_allclose(measured.longitudinal, analytic.longitudinal, atol=1e-5)
        assert velocity_coefficient(measured, analytic) >= 0.999

    @pytest.mark.parametrize("direction", ["longitudinal", "radial", "circumferential"])
    def test_peak_deviation(self, oracle_cfg: PhantomConfig, direction: str) -> None:
        """Test that each curve stays within 2% of its closed-form peak."""
        measured = velocity_curves(generate_phantom(oracle_cfg)).direction(direction)
        analytic = analytic_velocity_curves(oracle_cfg).direction(direction)
        peak = np.max(np.abs(analytic))
        assert peak > 0.0
        assert np.max(np.abs(measured - analytic)) / peak <= 0.02

    def test_empty_frame_is_nan(self, moving_series: MVMSeries) -> None:
        """Test that frames with an empty mask give NaN and invalidate the curves."""
        masks = moving_series.mask.copy()
        masks[3] = 0.0
        curves = velocity_curves(moving_series, masks)
        assert not curves.valid
        assert list(curves.frame_errors) == [3]
        assert np.isnan(curves.radial[3])
        assert np.isfinite(curves.radial[2])

    def test_masks_shape_checked(self, moving_series: MVMSeries) -> None:
        with pytest.raises(ShapeError):
            velocity_curves(moving_series, moving_series.mask[:-1])


class TestCoefficient:
    """The velocity coefficient (mean Pearson over directions)."""

    def _curves(self, scale: float = 1.0) -> VelocityCurves:
        t = np.linspace(0, 2 * np.pi, 12, endpoint=False)
        return VelocityCurves(
            longitudinal=scale * np.sin(t),
            radial=scale * np.cos(t),
            circumferential=scale * np.sin(2 * t),
        )

    def test_identical(self) -> None:
        assert velocity_coefficient(self._curves(), self._curves()) == pytest.approx(1.0)

    def test_scale_invariant(self) -> None:
        """Test that scaling a curve does not change the coefficient."""
        assert velocity_coefficient(self._curves(3.0), self._curves()) == pytest.approx(1.0)

    def test_inverted(self) -> None:
        assert velocity_coefficient(self._curves(-1.0), self._curves()) == pytest.approx(-1.0)

    def test_invalid_curves(self) -> None:
        bad = self._curves().model_copy(update={"frame_errors": {2: "empty mask"}})
        with pytest.raises(DegenerateError):
            velocity_coefficient(bad, self._curves())

    def test_constant_direction_names_it(self) -> None:
        flat = self._curves().model_copy(update={"radial": np.zeros(12)})
        with pytest.raises(DegenerateError) as info:
            velocity_coefficient(flat, self._curves())
        assert info.value.direction == "radial"

    def test_length_mismatch(self) -> None:
        short = VelocityCurves(longitudinal=[0, 1], radial=[0, 1], circumferential=[0, 1])
        with pytest.raises(ShapeError):
            velocity_coefficient(short, self._curves())


def test_curves_json(tmp_path: Path) -> None:
    curves = VelocityCurves(
        longitudinal=[0.0, 1.0, np.nan],
        radial=[1.0, 2.0, np.nan],
        circumferential=[0.5, 0.5, np.nan],
        frame_errors={2: "empty mask"},
    )
    text = curves_to_json(curves, tmp_path / "out" / "curves.json")
    assert (tmp_path / "out" / "curves.json").read_text() == text
    data = json.loads(text)
    assert np.isnan(data["radial"][2])
    assert data["valid"] is False
    back = VelocityCurves.from_dict(data)
    assert back.frame_errors == {2: "empty mask"}
    np.testing.assert_array_equal(back.radial[:2], [1.0, 2.0])
