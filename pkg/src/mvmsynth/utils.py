import hashlib
import json
import re
from pathlib import Path
from typing import Any, TypeVar

import yaml
from pydantic import BaseModel

from mvmsynth.errors import ValidationError

ModelT = TypeVar("ModelT", bound=BaseModel)


def load_config(path: str | Path, model: type[ModelT]) -> ModelT:
    """Load a JSON or YAML file into ``model``, raising ValidationError on schema issues."""
    p = Path(path)
    try:
        data = yaml.safe_load(p.read_text(encoding="utf-8")) or {}
    except (OSError, yaml.YAMLError) as ex:
        raise ValidationError(f"Cannot read config '{path}': {ex}") from ex
    try:
        return model.model_validate(data)
    except Exception as ex:  # pydantic.ValidationError or other
        raise ValidationError(f"Invalid {model.__name__} config '{path}': {ex}") from ex


def merge_overrides(cfg: ModelT, overrides: dict[str, Any]) -> ModelT:
    """Apply flag overrides (dotted keys allowed, ``None`` ignored) and re-validate."""
    data = cfg.model_dump()
    for key, value in overrides.items():
        if value is None:
            continue
        node = data
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value
    try:
        return type(cfg).model_validate(data)
    except Exception as ex:
        raise ValidationError(f"Invalid override for {type(cfg).__name__}: {ex}") from ex


def config_hash(cfg: BaseModel | dict[str, Any]) -> str:
    """Short SHA-256 of the canonical JSON form of a config."""
    payload = cfg.model_dump(mode="json") if isinstance(cfg, BaseModel) else cfg
    text = json.dumps(payload, sort_keys=True, default=str)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def dataset_hash(archive_dirs: list[Path]) -> str:
    """Hash of the manifests of a list of series archives (order-independent)."""
    h = hashlib.sha256()
    for d in sorted(Path(p) for p in archive_dirs):
        manifest = d / "manifest.json"
        h.update(manifest.read_bytes() if manifest.exists() else str(d).encode("utf-8"))
    return h.hexdigest()[:16]


def slug(s: str) -> str:
    s = s.strip().lower()
    s = re.sub(r"[^\w\-]+", "-", s)
    s = re.sub(r"-{2,}", "-", s).strip("-")
    return s or "item"


def series_fingerprint(arrays: list[tuple[str, list[Any]]]) -> str:
    """Hash of in-memory series given as (name, [arrays...]) pairs (order-independent)."""
    h = hashlib.sha256()
    for name, parts in sorted(arrays, key=lambda p: p[0]):
        h.update(name.encode("utf-8"))
        for a in parts:
            h.update(memoryview(a.tobytes()))
    return h.hexdigest()[:16]
