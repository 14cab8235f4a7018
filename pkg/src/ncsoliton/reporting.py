"""JSON reports with 17-significant-digit floats and CSV heatmaps."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .algebra import AlgebraElement

SCHEMA_VERSION = "1.0"


def _plain(obj):
    """Reduce numpy scalars, complex numbers and tuples to JSON-ready values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return "null"
        text = format(obj, ".17g")
        # keep floats recognizable as floats after a round trip
        return text if any(c in text for c in ".en") else text + ".0"
    return json.dumps(obj)


def dumps(obj, indent: int = 2) -> str:
    """Serialize with every float written to 17 significant digits."""
    return _encode(_plain(obj), indent, 0) + "\n"


def write_json(obj, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj))
    return path


def write_heatmap(p: AlgebraElement, path) -> Path:
    """``m,n,abs`` rows for every stored coefficient of ``p``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    r = p.radius
    with path.open("w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["m", "n", "abs"])
        for i in range(2 * r + 1):
            for j in range(2 * r + 1):
                out.writerow([i - r, j - r, format(float(abs(p.coeffs[i, j])), ".17g")])
    return path
