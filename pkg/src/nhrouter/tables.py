"""Byte-stable CSV/JSON emission."""
from __future__ import annotations

import json
import math
from pathlib import Path


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, int):
        return str(x)
    x = float(x)
    if x == 0:
        return "0"  # also folds -0
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {x} in table")
    return format(x, ".9g")


def csv_text(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.write_bytes(csv_text(header, rows).encode("ascii"))
    return path


def _clean(obj):
    if isinstance(obj, float):
        if obj == 0:
            return 0.0
        return float(fmt(obj))
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def json_text(obj) -> str:
    """Sorted keys, floats rounded to 9 significant digits."""
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_bytes(json_text(obj).encode("ascii"))
    return path
