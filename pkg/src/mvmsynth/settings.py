# src/mvmsynth/settings.py
from __future__ import annotations

import os
from functools import lru_cache

from pydantic_settings import BaseSettings, SettingsConfigDict


class MvmSettings(BaseSettings):
    """
    Centralized runtime configuration for mvmsynth.

    Convention:
      - All variables use the MVMSYNTH_ prefix (e.g. MVMSYNTH_NUM_THREADS=1).
      - Thread-count variables understood by BLAS/OpenMP are exported via
        `apply_to_environment()` so numpy, scipy and torch agree on parallelism.
    """

    model_config = SettingsConfigDict(
        env_prefix="MVMSYNTH_",
        env_file=".env",
        extra="ignore",
    )

    # General
    log_level: str = "INFO"
    artifacts_dir: str = "runs"

    # Compute
    device: str = "cpu"
    num_threads: int | None = None
    deterministic: bool = True


def _set_if_missing(name: str, value: str | None) -> None:
    if value is None:
        return
    os.environ.setdefault(name, value)


def apply_to_environment(settings: MvmSettings) -> None:
    """
    Export thread-count variables for OpenMP/MKL backed libraries.

    We set only if the env var is not already present (user wins).
    """
    if settings.num_threads is None:
        return
    _set_if_missing("OMP_NUM_THREADS", str(settings.num_threads))
    _set_if_missing("MKL_NUM_THREADS", str(settings.num_threads))
    _set_if_missing("OPENBLAS_NUM_THREADS", str(settings.num_threads))


def apply_torch_runtime(settings: MvmSettings | None = None) -> None:
    """Apply thread count and deterministic-algorithm flags to torch."""
    import torch

    s = settings or get_settings()
    if s.num_threads is not None:
        torch.set_num_threads(s.num_threads)
    if s.deterministic:
        torch.use_deterministic_algorithms(True, warn_only=True)


@lru_cache(maxsize=1)
def get_settings() -> MvmSettings:
    """
    Load settings once (env/.env), export thread envs, and cache.
    """
    s = MvmSettings()
    apply_to_environment(s)
    return s


def reload_settings() -> MvmSettings:
    """
    Clear cache and reload; useful in tests.
    """
    get_settings.cache_clear()
    return get_settings()
