"""Deterministic JSON and CSV output.

Floats are written with 17 significant digits so that files round-trip
exactly; non-finite values become null in JSON and empty cells in CSV.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math

import numpy as np


def fmt_float(x: float) -> str:
    text = format(float(x), ".17g")
    # keep a float marker so integral values read back as floats
    if not any(c in text for c in ".eni"):
        text += ".0"
    return text


def _plain(obj):
    """Convert numpy containers and dataclass-like objects to JSON-ready values."""
    if hasattr(obj, "to_dict"):
        return _plain(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, float):
        return fmt_float(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, bool)) or v is None for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    return json.dumps(obj)


def dumps(obj, indent=2) -> str:
    return _encode(_plain(obj), indent, 0) + "\n"


def write_json(path, obj) -> str:
    text = dumps(obj)
    with open(path, "w") as fh:
        fh.write(text)
    return text


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        out = []
        for x in row:
            if isinstance(x, (float, np.floating)):
                out.append(fmt_float(x) if math.isfinite(x) else "")
            elif isinstance(x, (bool, np.bool_)):
                out.append(int(x))
            else:
                out.append(x)
        w.writerow(out)
    return buf.getvalue()


def write_csv(path, header, rows) -> str:
    text = csv_text(header, rows)
    with open(path, "w") as fh:
        fh.write(text)
    return text


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


__all__ = ["csv_text", "dumps", "fmt_float", "sha256_file", "write_csv", "write_json"]
