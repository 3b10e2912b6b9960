"""Artifact writers: columnar net CSVs and nested JSON reports.

Identical inputs must produce byte-identical files: floats go out via
repr (shortest round-trip) in JSON and %.17g in CSV, rows in descending
scale order, keys sorted, and nothing time- or host-dependent is written.
"""

from __future__ import annotations

import json
import math
import os

import numpy as np

from .grid import EpsilonGrid


def write_net_csv(path: str, grid: EpsilonGrid, columns: np.ndarray) -> None:
    """Net dump: header eps,v0[,v1,...], one row per scale, 17 digits."""
    cols = np.asarray(columns)
    if cols.ndim == 1:
        cols = cols[:, None]
    names = ",".join("v%d" % j for j in range(cols.shape[1]))
    lines = ["eps," + names]
    for i, e in enumerate(grid.points):
        row = ",".join("%.17g" % v for v in cols[i])
        lines.append("%.17g,%s" % (e, row))
    _write_text(path, "\n".join(lines) + "\n")


def _sanitize(obj):
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_sanitize(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        if math.isnan(f):
            return "nan"
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_json_report(path: str, payload: dict, stamp: dict) -> None:
    body = {"meta": _sanitize(stamp)}
    body.update(_sanitize(payload))
    _write_text(path, json.dumps(body, sort_keys=True, indent=2) + "\n")


def _write_text(path: str, text: str) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def error_report(path_dir: str, message: str, code: int, stamp: dict) -> None:
    write_json_report(os.path.join(path_dir, "error.json"),
                      {"error": message, "exit_code": code}, stamp)
