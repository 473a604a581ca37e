"""Canonical report serialization.

JSON output is byte-stable for a fixed payload: keys sorted, no whitespace
variation, floats rendered by Python's shortest round-trip repr.  The CSV
writer uses the same float rendering so both formats carry identical numeric
content.
"""

from __future__ import annotations

import json

import numpy as np


def _sanitize(obj):
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj)!r}")


def dumps(payload: dict) -> str:
    """Deterministic JSON (sorted keys, compact separators, trailing newline)."""
    return json.dumps(_sanitize(payload), sort_keys=True, separators=(",", ":"), allow_nan=False) + "\n"


def format_cell(value) -> str:
    """Full-precision cell rendering shared by CSV and JSON content checks."""
    value = _sanitize(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def csv_lines(header: list[str], rows: list[list]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_cell(cell) for cell in row))
    return "\n".join(lines) + "\n"


def write_text(path: str | None, text: str) -> None:
    if path is None:
        print(text, end="")
    else:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)
