"""Named weight presets and the flat JSON weight-file format.

A weight file maps the nine feature names to values, optionally with a
critic bias; order on disk is irrelevant, the in-memory vector follows
FEATURE_NAMES.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .features import FEATURE_NAMES

PRESETS: dict[str, np.ndarray] = {
    "dt10": np.array([-2.18, 2.42, -2.17, -3.31, 0.95, -2.22, -0.81, -9.65, 1.27]),
    "dt20": np.array([-2.68, 1.38, -2.41, -6.32, 2.03, -2.71, -0.43, -9.48, 0.89]),
    "ppo-best": np.array([-0.51, 0.16, -0.40, -0.75, -0.18, -0.39, -0.17, -0.83, 0.36]),
}
for _v in PRESETS.values():
    _v.setflags(write=False)


class WeightFileError(ValueError):
    """Raised for unreadable or malformed weight files."""


def save_weights(path, weights, critic_bias: float | None = None,
                 meta: dict | None = None) -> None:
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (9,):
        raise WeightFileError("expected exactly 9 feature weights")
    record: dict = {name: float(w) for name, w in zip(FEATURE_NAMES, weights)}
    if critic_bias is not None:
        record["critic_bias"] = float(critic_bias)
    if meta:
        record["meta"] = meta
    Path(path).write_text(json.dumps(record, indent=2) + "\n")


def load_weights(path_or_name) -> np.ndarray:
    """Resolve a preset name or load a JSON weight file into the 9-vector."""
    key = str(path_or_name)
    if key in PRESETS:
        return PRESETS[key].copy()
    path = Path(key)
    if not path.exists():
        raise WeightFileError(f"unknown preset or missing weight file: {key!r}")
    try:
        record = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise WeightFileError(f"unreadable weight file {key!r}: {exc}") from exc
    if not isinstance(record, dict):
        raise WeightFileError(f"weight file {key!r} must be a JSON object")
    missing = [n for n in FEATURE_NAMES if n not in record]
    if missing:
        raise WeightFileError(f"weight file {key!r} missing features: {missing}")
    try:
        return np.array([float(record[n]) for n in FEATURE_NAMES])
    except (TypeError, ValueError) as exc:
        raise WeightFileError(f"non-numeric weight in {key!r}: {exc}") from exc
