"""CSV/JSON emission with a fixed numeric format (12 significant digits)."""
from __future__ import annotations

import csv
import io as _io
import json
import math

from .errors import DataError


def fmt(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, (int,)) and not isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return f"{value:.12g}"
    if value is None:
        return ""
    return str(value)


def rows_to_csv(rows: list[dict], columns: list[str] | None = None) -> str:
    if not rows and not columns:
        raise DataError("nothing to write")
    columns = columns or list(rows[0])
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(row[c]) for c in columns])
    return buf.getvalue()


def parse_csv(text: str) -> list[dict]:
    """Inverse of :func:`rows_to_csv`; numeric cells become floats."""
    reader = csv.DictReader(_io.StringIO(text))
    out = []
    for row in reader:
        parsed = {}
        for k, v in row.items():
            try:
                parsed[k] = float(v)
            except ValueError:
                parsed[k] = v
        out.append(parsed)
    return out


def _round(obj):
    if isinstance(obj, float):
        if math.isfinite(obj):
            return float(f"{obj:.12g}")
        return None
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def to_json(obj) -> str:
    return json.dumps(_round(obj), indent=2, sort_keys=True) + "\n"
