"""Deterministic report serialization.

Floats are written with 17 significant digits so every value round-trips
exactly; keys keep insertion order and nothing time-dependent is written, so
identical runs produce byte-identical files.
"""

import csv
import io
import json
import math
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np

HARDY_COLUMNS = (
    "function",
    "form",
    "p",
    "lhs",
    "classical_rhs",
    "correction",
    "correction_scale",
    "refined_rhs",
    "classical_margin",
    "refined_margin",
    "err_budget",
    "verdict",
    "converged",
)


def format_float(x: float) -> str:
    if math.isnan(x):
        return '"NaN"'
    if math.isinf(x):
        return '"Infinity"' if x > 0 else '"-Infinity"'
    text = format(x, ".17g")
    if text.lstrip("-").isdigit():
        text += ".0"
    return text


def _plain(value: Any) -> Any:
    if hasattr(value, "to_dict"):
        return value.to_dict()
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    return value


def _encode(value: Any, indent: int, level: int) -> str:
    value = _plain(value)
    pad = " " * (indent * (level + 1))
    close = " " * (indent * level)
    if value is None or isinstance(value, bool):
        return json.dumps(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format_float(value)
    if isinstance(value, complex):
        return _encode([value.real, value.imag], indent, level)
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in value.items()]
        return "{\n" + ",\n".join(items) + f"\n{close}}}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        if all(isinstance(_plain(v), (int, float, bool)) or _plain(v) is None for v in value):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in value) + "]"
        items = [f"{pad}{_encode(v, indent, level + 1)}" for v in value]
        return "[\n" + ",\n".join(items) + f"\n{close}]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def to_json(payload: Any, indent: int = 2) -> str:
    """Serialize to JSON text with 17-significant-digit floats."""
    return _encode(payload, indent, 0) + "\n"


def _cell(value: Any) -> str:
    value = _plain(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value).strip('"')
    if value is None:
        return ""
    return str(value)


def to_csv(rows: list[dict[str, Any]], columns: tuple[str, ...] | list[str] | None = None) -> str:
    """Flat rows to CSV in a fixed column order (default: flat keys in order of first appearance)."""
    if columns is None:
        columns = []
        for row in rows:
            columns.extend(
                k for k, v in row.items() if k not in columns and not isinstance(_plain(v), (dict, list))
            )
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c)) for c in columns])
    return buffer.getvalue()


def write_text(text: str, path: Path | None) -> None:
    """Write to ``path``, or stdout when it is None."""
    if path is None:
        print(text, end="")
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
