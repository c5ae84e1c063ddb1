from __future__ import annotations

from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

# ─────────────────────────────────────────────────────────────────────────────
# Cine velocity-mapping series (one slice)
# ─────────────────────────────────────────────────────────────────────────────

DIRECTIONS: tuple[str, str, str] = ("x", "y", "z")


class MVMSeries(BaseModel):
    """One slice's cine series.

    Arrays are float32: magnitude [T,H,W] in [0,1], phase [T,3,H,W] in [-1,1]
    (direction order x in-plane, y in-plane, z through-plane; velocity =
    phase * venc), mask [T,H,W] in {0,1}. Invariants are checked by
    ``mvmsynth.series.validate_series``, not at construction, so that archive
    and phantom code can report the offending field precisely.
    """

    model_config = ConfigDict(extra="ignore", arbitrary_types_allowed=True)

    subject_id: str = Field(..., min_length=1)
    slice_id: str = Field(..., min_length=1)
    magnitude: np.ndarray
    phase: np.ndarray
    mask: np.ndarray
    pixel_spacing_mm: tuple[float, float] = (1.7, 1.7)
    venc_mm_per_s: tuple[float, float, float] = (1.0, 1.0, 1.0)

    @field_validator("magnitude", "phase", "mask", mode="before")
    @classmethod
    def _as_float32(cls, v: Any) -> np.ndarray:
        return np.ascontiguousarray(np.asarray(v, dtype=np.float32))

    @property
    def frame_count(self) -> int:
        return int(self.magnitude.shape[0])

    @property
    def T(self) -> int:  # noqa: N802 - domain symbol
        return self.frame_count

    @property
    def shape_hw(self) -> tuple[int, int]:
        return int(self.magnitude.shape[-2]), int(self.magnitude.shape[-1])

    @property
    def degenerate_frames(self) -> list[int]:
        """Frames whose mask has no foreground pixel."""
        if self.mask.ndim != 3:
            return []
        counts = self.mask.reshape(self.mask.shape[0], -1).sum(axis=1)
        return [int(t) for t in np.flatnonzero(counts == 0)]

    @property
    def degenerate(self) -> bool:
        return bool(self.degenerate_frames)

    def velocity(self) -> np.ndarray:
        """Physical velocity [T,3,H,W] in mm/s (phase times venc per direction)."""
        venc = np.asarray(self.venc_mm_per_s, dtype=np.float64).reshape(1, 3, 1, 1)
        return self.phase.astype(np.float64) * venc

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MVMSeries):
            return NotImplemented
        return (
            self.subject_id == other.subject_id
            and self.slice_id == other.slice_id
            and tuple(self.pixel_spacing_mm) == tuple(other.pixel_spacing_mm)
            and tuple(self.venc_mm_per_s) == tuple(other.venc_mm_per_s)
            and np.array_equal(self.magnitude, other.magnitude)
            and np.array_equal(self.phase, other.phase)
            and np.array_equal(self.mask, other.mask)
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:  # pragma: no cover - trivial
        return (
            f"MVMSeries(subject_id={self.subject_id!r}, slice_id={self.slice_id!r}, "
            f"T={self.frame_count}, hw={self.shape_hw}, spacing={self.pixel_spacing_mm})"
        )


# ─────────────────────────────────────────────────────────────────────────────
# Dataset split (by subject, never by series)
# ─────────────────────────────────────────────────────────────────────────────


class SeriesRef(BaseModel):
    """Pointer to one series archive on disk."""

    model_config = ConfigDict(extra="ignore")

    subject_id: str = Field(..., min_length=1)
    slice_id: str = Field(..., min_length=1)
    path: Path


class DatasetSplit(BaseModel):
    """Train / validation / test lists, pairwise disjoint by subject."""

    model_config = ConfigDict(extra="ignore")

    train: list[SeriesRef] = Field(default_factory=list)
    val: list[SeriesRef] = Field(default_factory=list)
    test: list[SeriesRef] = Field(default_factory=list)

    @model_validator(mode="after")
    def _disjoint_subjects(self) -> "DatasetSplit":
        groups = {
            "train": {r.subject_id for r in self.train},
            "val": {r.subject_id for r in self.val},
            "test": {r.subject_id for r in self.test},
        }
        names = list(groups)
        for i, a in enumerate(names):
            for b in names[i + 1 :]:
                shared = groups[a] & groups[b]
                if shared:
                    raise ValueError(
                        f"subjects shared between {a} and {b}: " + ", ".join(sorted(shared))
                    )
        return self

    def subjects(self, part: str) -> set[str]:
        return {r.subject_id for r in getattr(self, part)}
