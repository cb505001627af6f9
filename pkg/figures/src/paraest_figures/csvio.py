"""Typed access to the harness CSV files."""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np


class SchemaError(ValueError):
    """A CSV is missing columns the figure needs."""


def read_table(path: str | Path, required: tuple[str, ...]) -> dict[str, np.ndarray]:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise SchemaError(f"{path}: empty file")
        missing = [c for c in required if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing columns {missing}; has {header}")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    cols: dict[str, np.ndarray] = {}
    for name in header:
        j = header.index(name)
        raw = [r[j] for r in rows]
        try:
            cols[name] = np.array([float(v) for v in raw])
        except ValueError:
            cols[name] = np.array(raw)
    return cols


def mesh_size(level: int) -> float:
    """Element diameter of refinement level i: sqrt(2) 2^{-i}."""
    return math.sqrt(2.0) * 2.0 ** (-level)


def by_level(paths: list[str | Path], required: tuple[str, ...]) -> dict[int, dict]:
    out = {}
    for p in paths:
        table = read_table(p, required)
        lv = int(table["level"][0])
        out[lv] = table
    return dict(sorted(out.items()))
