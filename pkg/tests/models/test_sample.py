"""Tests for conditional synthesis sample models."""

import numpy as np
import pytest
from pydantic import ValidationError as PydanticValidationError

from mvmsynth.models.sample import ConditionMap, FrameSource, SynthesisSample


class TestConditionMap:
    def test_requires_two_by_32_by_32(self) -> None:
        with pytest.raises(PydanticValidationError, match="2x32x32"):
            ConditionMap(values=np.zeros((2, 16, 16)))

    def test_fractions(self) -> None:
        values = np.empty((2, 32, 32))
        values[0], values[1] = 0.3, 0.75
        cond = ConditionMap(values=values)
        assert cond.values.dtype == np.float32
        assert cond.tau_fraction == pytest.approx(0.3)
        assert cond.k_fraction == pytest.approx(0.75)


class TestSynthesisSample:
    """Test SynthesisSample helpers."""

    def _sample(self, tau: int = 2, k: int = 3) -> SynthesisSample:
        phase_in = np.concatenate([np.zeros((3, 32, 32)), np.ones((3, 32, 32))])
        return SynthesisSample(
            mag_in=np.zeros((2, 32, 32)),
            phase_in=phase_in,
            mask_in=np.zeros((2, 32, 32)),
            mag_target=np.zeros((1, 32, 32)),
            phase_target=np.zeros((3, 32, 32)),
            mask_target=np.zeros((1, 32, 32)),
            condition=ConditionMap(values=np.zeros((2, 32, 32))),
            tau=tau,
            k=k,
            series_ref="sub000/s0",
        )

    def test_derived_fields(self) -> None:
        """Test weight, target index and key."""
        s = self._sample()
        assert s.t == 0.75
        assert s.target_index == 5
        assert s.key == "sub000/s0:tau=2:k=3"
        assert s.shape_hw == (32, 32)

    def test_anchor_phase(self) -> None:
        s = self._sample()
        assert not s.anchor_phase(0).any()
        assert s.anchor_phase(1).shape == (3, 32, 32)
        assert np.all(s.anchor_phase(1) == 1.0)


class TestFrameSource:
    def test_anchor_defaults(self) -> None:
        src = FrameSource(frame=4, kind="anchor")
        assert (src.tau, src.k) == (-1, 0)

    def test_is_frozen(self) -> None:
        src = FrameSource(frame=1, kind="synthesized", tau=0, k=1)
        with pytest.raises(PydanticValidationError):
            src.k = 2  # type: ignore[misc]

    @pytest.mark.parametrize(
        "fields",
        [
            {"frame": 1, "kind": "guessed"},
            {"frame": -1, "kind": "anchor"},
            {"frame": 5, "kind": "synthesized", "tau": 1, "k": 4},
        ],
    )
    def test_rejects_invalid(self, fields: dict) -> None:
        """Test unknown kinds, negative frames and offsets outside 1..3."""
        with pytest.raises(PydanticValidationError):
            FrameSource(**fields)
