"""mvmsynth: conditional temporal frame synthesis for cine myocardial velocity mapping.

Multi-task attention UNet, classical interpolation baselines, image-quality
metrics and global velocity analysis over magnitude / three-direction phase /
myocardium-mask series.
"""

from __future__ import annotations

from .errors import (
    ArchiveError,
    ArgumentError,
    DegenerateError,
    MvmError,
    NumericError,
    ReportError,
    ShapeError,
    TrainingError,
    ValidationError,
)

__all__ = [
    "__version__",
    "ArchiveError",
    "ArgumentError",
    "DegenerateError",
    "MvmError",
    "NumericError",
    "ReportError",
    "ShapeError",
    "TrainingError",
    "ValidationError",
]

__version__ = "0.1.0"
