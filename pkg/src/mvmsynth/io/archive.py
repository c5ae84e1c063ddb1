"""Portable series archive: ``manifest.json`` plus raw little-endian float32 files.

Layout::

    <dir>/manifest.json   version "1", ids, dims, spacing, venc, per-array SHA-256
    <dir>/magnitude.f32   [T, H, W]
    <dir>/phase.f32       [T, 3, H, W]
    <dir>/mask.f32        [T, H, W]
"""

from __future__ import annotations

import hashlib
import json
import logging
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import ValidationError as PydanticValidationError

from mvmsynth.errors import (
    ArchiveError,
    ChecksumError,
    MissingFileError,
    ShapeError,
    UnsupportedVersionError,
)
from mvmsynth.models.series import DatasetSplit, MVMSeries
from mvmsynth.series import validate_series

log = logging.getLogger("mvmsynth.io")

ARCHIVE_VERSION = "1"
MANIFEST = "manifest.json"
RAW_DTYPE = np.dtype("<f4")
_ARRAYS = ("magnitude", "phase", "mask")
_REQUIRED_KEYS = (
    "subject_id",
    "slice_id",
    "T",
    "H",
    "W",
    "pixel_spacing_mm",
    "venc_mm_per_s",
    "arrays",
)


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _shapes(T: int, H: int, W: int) -> dict[str, tuple[int, ...]]:
    return {"magnitude": (T, H, W), "phase": (T, 3, H, W), "mask": (T, H, W)}


def save_series(series: MVMSeries, path: str | Path) -> Path:
    """Validate and write ``series`` as an archive directory. Returns the directory."""
    validate_series(series)
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    T, H, W = series.magnitude.shape
    arrays: dict[str, Any] = {}
    for name in _ARRAYS:
        raw = np.ascontiguousarray(getattr(series, name), dtype=RAW_DTYPE).tobytes(order="C")
        fname = f"{name}.f32"
        (out / fname).write_bytes(raw)
        arrays[name] = {"file": fname, "sha256": _sha256(raw)}
    manifest = {
        "version": ARCHIVE_VERSION,
        "subject_id": series.subject_id,
        "slice_id": series.slice_id,
        "T": int(T),
        "H": int(H),
        "W": int(W),
        "pixel_spacing_mm": [float(s) for s in series.pixel_spacing_mm],
        "venc_mm_per_s": [float(v) for v in series.venc_mm_per_s],
        "dtype": "float32-le",
        "index_order": {"magnitude": "t,y,x", "phase": "t,dir,y,x", "mask": "t,y,x"},
        "arrays": arrays,
    }
    (out / MANIFEST).write_text(json.dumps(manifest, indent=2), encoding="utf-8")
    log.debug("wrote series %s/%s to %s", series.subject_id, series.slice_id, out)
    return out


def read_manifest(path: str | Path) -> dict[str, Any]:
    p = Path(path) / MANIFEST
    if not p.is_file():
        raise MissingFileError(f"missing {MANIFEST} in '{path}'")
    try:
        manifest: dict[str, Any] = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as ex:
        raise ArchiveError(f"corrupt manifest '{p}': {ex}") from ex
    version = str(manifest.get("version"))
    if version != ARCHIVE_VERSION:
        raise UnsupportedVersionError(f"unsupported archive version {version!r} in '{path}'")
    return manifest


def load_series(path: str | Path) -> MVMSeries:
    """Read and validate an archive written by ``save_series``."""
    root = Path(path)
    manifest = read_manifest(root)
    for key in _REQUIRED_KEYS:
        if key not in manifest:
            raise ArchiveError(f"manifest missing '{key}' in '{root}'")
    try:
        T, H, W = int(manifest["T"]), int(manifest["H"]), int(manifest["W"])
        entries = manifest["arrays"]
        spacing = tuple(float(s) for s in manifest["pixel_spacing_mm"])
        venc = tuple(float(v) for v in manifest["venc_mm_per_s"])
    except (KeyError, TypeError, ValueError) as ex:
        raise ArchiveError(f"incomplete manifest in '{root}': {ex}") from ex
    data: dict[str, np.ndarray] = {}
    for name, shape in _shapes(T, H, W).items():
        entry = entries.get(name)
        if entry is None:
            raise ArchiveError(f"manifest does not list array '{name}'")
        fp = root / entry["file"]
        if not fp.is_file():
            raise MissingFileError(f"missing raw file '{fp}'")
        raw = fp.read_bytes()
        expected = int(np.prod(shape)) * RAW_DTYPE.itemsize
        if len(raw) != expected:
            raise ShapeError(
                f"'{entry['file']}' holds {len(raw)} bytes, manifest shape {shape} needs {expected}"
            )
        if _sha256(raw) != entry.get("sha256"):
            raise ChecksumError(f"checksum mismatch for '{entry['file']}'")
        data[name] = np.frombuffer(raw, dtype=RAW_DTYPE).reshape(shape).astype(np.float32)
    try:
        series = MVMSeries(
            subject_id=manifest["subject_id"],
            slice_id=manifest["slice_id"],
            magnitude=data["magnitude"],
            phase=data["phase"],
            mask=data["mask"],
            pixel_spacing_mm=spacing,
            venc_mm_per_s=venc,
        )
    except PydanticValidationError as ex:
        raise ArchiveError(f"invalid manifest fields in '{root}': {ex}") from ex
    return validate_series(series)


def save_split(split: DatasetSplit, path: str | Path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(split.model_dump_json(indent=2), encoding="utf-8")
    return p


def load_split(path: str | Path) -> DatasetSplit:
    """Load ``split.json``; relative archive paths resolve against its directory."""
    p = Path(path)
    if not p.is_file():
        raise MissingFileError(f"missing split file '{p}'")
    try:
        split = DatasetSplit.model_validate_json(p.read_text(encoding="utf-8"))
    except PydanticValidationError as ex:
        raise ArchiveError(f"invalid split file '{p}': {ex}") from ex
    for part in (split.train, split.val, split.test):
        for ref in part:
            if not ref.path.is_absolute():
                ref.path = p.parent / ref.path
    return split
