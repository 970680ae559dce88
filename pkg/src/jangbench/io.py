"""Deterministic CSV/JSON persistence: 12 significant digits, sorted keys, LF endings."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import ValidationError

PROFILE_HEADER = ["tau", "psi", "dpsi", "residual"]
MARGIN_HEADER = ["tau", "residual", "margin", "ratio"]


def fmt(v) -> str:
    """Fixed 12-significant-digit text for a real."""
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".12g")


def _clean(obj):
    """Round floats to 12 significant digits; NaN/inf become null; arrays become lists."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return float(format(v, ".12g")) if math.isfinite(v) else None
    return obj


def dumps(obj, indent: int | None = 2) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=indent, allow_nan=False)


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(obj) + "\n")
    return path


def write_table(path, header, columns) -> Path:
    """Write equal-length columns under ``header`` as CSV."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    cols = [np.asarray(c, dtype=float) for c in columns]
    if len(cols) != len(header) or len({c.size for c in cols}) != 1:
        raise ValidationError("table columns do not match the header")
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*cols):
            w.writerow([fmt(v) for v in row])
    return path


def write_profile_csv(path, profile, data=None) -> Path:
    """``tau,psi,dpsi,residual``; residual is 0 at the ends and when no data are given."""
    d1, _ = profile.derivatives()
    res = profile.residuals(data) if data is not None else np.zeros_like(profile.values)
    return write_table(path, PROFILE_HEADER, [profile.grid.nodes, profile.values, d1, res])


def write_margin_csv(path, report) -> Path:
    return write_table(path, MARGIN_HEADER, [report.tau, report.residual, report.margin, report.ratio])


def read_table(path) -> dict:
    path = Path(path)
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValidationError(f"{path}: empty file") from None
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValidationError(f"{path}:{lineno}: expected {len(header)} columns, got {len(row)}")
            try:
                rows.append([float(c) for c in row])
            except ValueError as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from None
    a = np.array(rows, dtype=float).reshape(-1, len(header))
    return {h: a[:, i] for i, h in enumerate(header)}


def read_profile_csv(path):
    """Return (tau, psi) from a profile CSV (needs at least the tau and psi columns)."""
    t = read_table(path)
    if "tau" not in t or "psi" not in t:
        raise ValidationError(f"{path}: profile CSV needs tau and psi columns")
    tau, psi = t["tau"], t["psi"]
    if tau.size < 4 or np.any(np.diff(tau) <= 0):
        raise ValidationError(f"{path}: tau must be strictly increasing with at least 4 rows")
    return tau, psi


def write_jsonl(path, records) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(dumps(rec, indent=None) + "\n")
    return path
