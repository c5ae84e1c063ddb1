"""Shared fixtures: small analytic phantoms and tiny network configurations."""

from __future__ import annotations

import numpy as np
import pytest

from mvmsynth.models.network import NetworkConfig
from mvmsynth.models.phantom import PhantomConfig
from mvmsynth.models.series import MVMSeries
from mvmsynth.phantom import generate_phantom


@pytest.fixture
def phantom_cfg() -> PhantomConfig:
    """64x64 moving phantom with a short cycle."""
    return PhantomConfig(T=12, H=64, W=64, noise_sigma=0.0, seed=1)


@pytest.fixture
def small_phantom_cfg() -> PhantomConfig:
    """32x32 phantom (coarser spacing so the annulus fits)."""
    return PhantomConfig(T=9, H=32, W=32, pixel_spacing_mm=(3.0, 3.0), noise_sigma=0.0, seed=2)


@pytest.fixture
def static_cfg(phantom_cfg: PhantomConfig) -> PhantomConfig:
    return phantom_cfg.model_copy(
        update={
            "radial_amplitude": 0.0,
            "twist_amplitude_rad": 0.0,
            "longitudinal_amplitude_mm_per_s": 0.0,
        }
    )


@pytest.fixture
def moving_series(phantom_cfg: PhantomConfig) -> MVMSeries:
    return generate_phantom(phantom_cfg)


@pytest.fixture
def small_series(small_phantom_cfg: PhantomConfig) -> MVMSeries:
    return generate_phantom(small_phantom_cfg)


@pytest.fixture
def static_series(static_cfg: PhantomConfig) -> MVMSeries:
    return generate_phantom(static_cfg)


@pytest.fixture
def tiny_net() -> NetworkConfig:
    return NetworkConfig(base_channels=4)


def random_series(
    T: int = 6, H: int = 32, W: int = 32, *, seed: int = 0, subject: str = "s", slice_id: str = "a"
) -> MVMSeries:
    """Valid random series with a square myocardium mask in every frame."""
    rng = np.random.default_rng(seed)
    mask = np.zeros((T, H, W), dtype=np.float32)
    mask[:, H // 4 : 3 * H // 4, W // 4 : 3 * W // 4] = 1.0
    return MVMSeries(
        subject_id=subject,
        slice_id=slice_id,
        magnitude=rng.uniform(0.0, 1.0, size=(T, H, W)),
        phase=rng.uniform(-1.0, 1.0, size=(T, 3, H, W)),
        mask=mask,
    )
