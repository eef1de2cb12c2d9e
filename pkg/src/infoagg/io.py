"""Config loading, problem documents and deterministic output writers."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path
from typing import Any, Iterable

import numpy as np
import yaml

from .errors import InvalidConfig
from .prob_core import Partition, ProbabilitySpace, RandomVariable


def load_config(path: str | Path) -> dict:
    """Read a YAML (or JSON) mapping."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise InvalidConfig(f"cannot parse {path}: {exc}") from exc
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise InvalidConfig(f"{path}: top level must be a mapping")
    return doc


def _plain(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def canonical_json(doc: Any) -> str:
    return json.dumps(_plain(doc), sort_keys=True, separators=(",", ":"))


def digest(doc: Any) -> str:
    return hashlib.sha256(canonical_json(doc).encode("utf-8")).hexdigest()


def fmt(value: Any) -> str:
    """Cell text: 17 significant digits for floats, lowercase booleans."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_csv(path: Path, header: list[str], rows: Iterable[Iterable[Any]]) -> Path:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    return path


def write_json(path: Path, doc: Any) -> Path:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_plain(doc), fh, sort_keys=True, indent=2)
        fh.write("\n")
    return path


def problem_to_doc(space: ProbabilitySpace, y: RandomVariable, infos: list[Partition]) -> dict:
    return {
        "space": space.to_dict(),
        "outcome": y.to_dict(),
        "forecasters": [g.to_dict() for g in infos],
    }


def problem_from_doc(doc: dict) -> tuple[ProbabilitySpace, RandomVariable, list[Partition]]:
    """Inverse of ``problem_to_doc``; blocks use 0-based outcome indices."""
    try:
        space = ProbabilitySpace.from_dict(doc["space"])
        y = RandomVariable.from_dict(space, doc["outcome"])
        infos = [Partition.from_dict(f, space.n_outcomes) for f in doc.get("forecasters", [])]
    except (KeyError, TypeError) as exc:
        raise InvalidConfig(f"malformed problem document: missing or bad field {exc}") from exc
    return space, y, infos
