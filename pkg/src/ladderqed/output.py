"""Deterministic CSV and manifest writers.

CSV contract (bit-exact, diffable): comma separated, header row, LF line
endings, floats in scientific notation with 17 significant digits,
integers plain, strings verbatim.
"""

from __future__ import annotations

import json
from pathlib import Path


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int,)) and not isinstance(v, bool):
        return str(v)
    if isinstance(v, float):
        return f"{v:.16e}"
    return str(v)


def write_csv(path: Path, header: list[str], rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    path.write_bytes(("\n".join(lines) + "\n").encode("ascii"))
    return path


def _jsonable(obj):
    import numpy as np

    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return None if f != f else f  # JSON has no NaN
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def write_manifest(path: Path, manifest: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_jsonable(manifest), indent=2, sort_keys=True) + "\n"
    path.write_bytes(text.encode("utf-8"))
    return path
