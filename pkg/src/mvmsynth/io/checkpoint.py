"""Checkpoint container: one zip holding ``checkpoint.json`` and raw float32 parameters.

Layout::

    checkpoint.json     {"version": "1", "config", "metadata",
                         "parameters": {name: {file, shape, sha256}}}
    params/<name>.f32   little-endian float32, C order
"""

from __future__ import annotations

import hashlib
import json
import logging
import zipfile
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import ValidationError as PydanticValidationError

from mvmsynth.errors import (
    ArchiveError,
    ChecksumError,
    ConfigMismatchError,
    MissingFileError,
    ShapeError,
    UnsupportedVersionError,
)
from mvmsynth.models.network import Checkpoint, NetworkConfig, TrainingMetadata

log = logging.getLogger("mvmsynth.io")

CHECKPOINT_VERSION = "1"
INDEX = "checkpoint.json"
RAW_DTYPE = np.dtype("<f4")


def save_checkpoint(ckpt: Checkpoint, path: str | Path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    index: dict[str, Any] = {}
    with zipfile.ZipFile(p, "w", compression=zipfile.ZIP_DEFLATED) as zf:
        for name, arr in ckpt.parameters.items():
            raw = np.ascontiguousarray(arr, dtype=RAW_DTYPE).tobytes(order="C")
            member = f"params/{name}.f32"
            zf.writestr(member, raw)
            index[name] = {
                "file": member,
                "shape": [int(s) for s in np.shape(arr)],
                "sha256": hashlib.sha256(raw).hexdigest(),
            }
        doc = {
            "version": CHECKPOINT_VERSION,
            "config": ckpt.config.model_dump(mode="json"),
            "metadata": ckpt.metadata.model_dump(mode="json"),
            "parameters": index,
        }
        zf.writestr(INDEX, json.dumps(doc, indent=2))
    log.debug("saved checkpoint step=%d to %s", ckpt.metadata.step, p)
    return p


def load_checkpoint(path: str | Path, config: NetworkConfig | None = None) -> Checkpoint:
    """Read a checkpoint; ``config``, when given, must equal the stored one."""
    p = Path(path)
    if not p.is_file():
        raise MissingFileError(f"missing checkpoint '{p}'")
    try:
        zf = zipfile.ZipFile(p)
    except zipfile.BadZipFile as ex:
        raise ArchiveError(f"'{p}' is not a checkpoint container: {ex}") from ex
    with zf:
        try:
            doc = json.loads(zf.read(INDEX))
        except KeyError as ex:
            raise MissingFileError(f"'{p}' has no {INDEX}") from ex
        version = str(doc.get("version"))
        if version != CHECKPOINT_VERSION:
            raise UnsupportedVersionError(f"unsupported checkpoint version {version!r}")
        try:
            stored = NetworkConfig.model_validate(doc["config"])
            metadata = TrainingMetadata.model_validate(doc.get("metadata", {}))
        except (KeyError, PydanticValidationError) as ex:
            raise ArchiveError(f"corrupt checkpoint header in '{p}': {ex}") from ex
        if config is not None and config != stored:
            raise ConfigMismatchError(
                f"checkpoint config {stored.model_dump()} differs from requested "
                f"{config.model_dump()}"
            )
        params: dict[str, np.ndarray] = {}
        names = set(zf.namelist())
        for name, entry in doc.get("parameters", {}).items():
            member = entry["file"]
            if member not in names:
                raise MissingFileError(f"checkpoint lacks parameter file '{member}'")
            raw = zf.read(member)
            shape = tuple(int(s) for s in entry["shape"])
            if len(raw) != int(np.prod(shape)) * RAW_DTYPE.itemsize:
                raise ShapeError(f"parameter '{name}' size does not match shape {shape}")
            if hashlib.sha256(raw).hexdigest() != entry.get("sha256"):
                raise ChecksumError(f"checksum mismatch for parameter '{name}'")
            params[name] = np.frombuffer(raw, dtype=RAW_DTYPE).reshape(shape).astype(np.float32)
    return Checkpoint(config=stored, parameters=params, metadata=metadata)
