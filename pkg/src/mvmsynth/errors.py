"""Centralized structured exception hierarchy for mvmsynth.

A small, well-named set of error types that user code and tests can depend on
without pattern-matching exceptions raised by numpy, torch or pydantic.

Design:
  - MvmError is the common base (subclass of RuntimeError for ergonomics).
  - ValidationError / ArgumentError / ShapeError / DegenerateError also derive
    from ``ValueError`` so callers catching the builtin keep working.
  - ArchiveError groups everything that can go wrong reading or writing series
    archives and checkpoints.
"""

from __future__ import annotations

__all__ = [
    "MvmError",
    "ValidationError",
    "ArgumentError",
    "ShapeError",
    "NumericError",
    "ArchiveError",
    "MissingFileError",
    "ChecksumError",
    "UnsupportedVersionError",
    "ConfigMismatchError",
    "DegenerateError",
    "TrainingError",
    "ReportError",
]


class MvmError(RuntimeError):
    """Base class for all structured mvmsynth errors."""


class ValidationError(MvmError, ValueError):
    """A record violates its invariants. ``field`` names the offending field."""

    def __init__(self, message: str, *, field: str | None = None) -> None:
        super().__init__(message)
        self.field = field


class ArgumentError(MvmError, ValueError):
    """An operation was called with arguments outside its domain."""


class ShapeError(MvmError, ValueError):
    """Array shapes disagree with each other or with a declared layout."""


class NumericError(MvmError, ArithmeticError):
    """Non-finite values in inputs or parameters."""


class ArchiveError(MvmError):
    """Series archive or checkpoint cannot be read or written."""


class MissingFileError(ArchiveError, FileNotFoundError):
    """A file required by an archive is missing."""


class ChecksumError(ArchiveError):
    """Stored SHA-256 does not match the raw file contents."""


class UnsupportedVersionError(ArchiveError):
    """Manifest or checkpoint declares a format version we cannot read."""


class ConfigMismatchError(ArchiveError):
    """Checkpoint parameters do not match the network configuration."""


class DegenerateError(MvmError, ValueError):
    """Input is degenerate for the requested quantity (empty mask, constant curve).

    ``direction`` is set when a velocity direction caused the failure.
    """

    def __init__(self, message: str, *, direction: str | None = None) -> None:
        super().__init__(message)
        self.direction = direction


class TrainingError(MvmError):
    """Training cannot start or diverged (empty split, NaN loss)."""


class ReportError(MvmError):
    """A report is empty or cannot be rendered."""
