"""CSV and JSON writers for curves, rate tables and reports.

All writers are deterministic: fixed float formats, sorted JSON keys, no timestamps.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .curves import DecayCurve


def to_jsonable(obj):
    """Convert numpy scalars/arrays and complex numbers into plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if np.isfinite(x) else str(x)
    return obj


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path


def write_norm_csv(path, curve: DecayCurve) -> Path:
    """``t,norm`` with 12 decimals."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "norm"])
        for t, v in zip(curve.times, curve.values):
            w.writerow([f"{t:.12f}", f"{v:.12f}"])
    return path


def write_curve_csv(path, curve: DecayCurve) -> Path:
    """``t,value[,stderr]`` plus a ``.json`` sidecar with the fit results."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        has_se = curve.stderr is not None
        w.writerow(["t", "value", "stderr"] if has_se else ["t", "value"])
        for i, (t, v) in enumerate(zip(curve.times, curve.values)):
            row = [f"{t:.12g}", f"{v:.17g}"]
            if has_se:
                row.append(f"{curve.stderr[i]:.17g}")
            w.writerow(row)
    write_json(path.with_suffix(".json"), fit_summary(curve))
    return path


def fit_summary(curve: DecayCurve) -> dict:
    return {
        "fitted_rate": curve.fitted_rate,
        "fitted_prefactor": curve.fitted_prefactor,
        "fit_window": list(curve.fit_window),
    }


RATE_COLUMNS = ("param", "value", "lambda_lower", "T_star", "C")


def write_rates_csv(path, rows) -> Path:
    """Rows of ``(param, value, lambda_lower, T_star, C)``."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RATE_COLUMNS)
        for param, value, lam, T, C in rows:
            w.writerow([param, f"{value:.12g}", f"{lam:.12e}", f"{T:.12g}", f"{C:.12g}"])
    return path


def read_csv(path) -> dict:
    """Columns of a numeric CSV written by this module (``param`` kept as strings)."""
    with Path(path).open() as fh:
        rows = list(csv.DictReader(fh))
    out = {}
    for key in rows[0] if rows else []:
        col = [r[key] for r in rows]
        try:
            out[key] = np.array(col, dtype=float)
        except ValueError:
            out[key] = col
    return out
