"""File formats: coreset CSV, sweep/curve CSVs and JSON reports."""
from __future__ import annotations

import csv
import json
import math
import subprocess
from functools import lru_cache
from pathlib import Path

import numpy as np

from .core import InputError
from .coreset import WeightedCoreset

# JSON keys holding wall-clock measurements; everything else is reproducible
TIMING_KEYS = frozenset({"build_time", "wall_time", "T_C", "T_S", "T_X", "speedup", "elapsed"})


@lru_cache(maxsize=1)
def version_string() -> str:
    from . import __version__

    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True, text=True, timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+g{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def _fmt(v: float) -> str:
    return repr(float(v))


def _write_preamble(fh, config):
    fh.write(f"# version: {version_string()}\n")
    if config is not None:
        fh.write(f"# config: {json.dumps(_clean(config), sort_keys=True)}\n")


def write_coreset_csv(path, S: WeightedCoreset, config: dict | None = None):
    """Columns: id, weight, provenance, x0..x{d-1}, after ``#`` provenance lines."""
    dim = S.points.shape[1]
    with Path(path).open("w", newline="") as fh:
        _write_preamble(fh, config)
        w = csv.writer(fh)
        w.writerow(["id", "weight", "provenance"] + [f"x{j}" for j in range(dim)])
        for i in range(len(S)):
            w.writerow([int(S.ids[i]), _fmt(S.weights[i]), S.provenance[i]]
                       + [_fmt(v) for v in S.points[i]])


def read_coreset_csv(path) -> WeightedCoreset:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(line for line in fh if not line.startswith("#"))
        header = next(reader)
        if header[:3] != ["id", "weight", "provenance"]:
            raise InputError(f"{path} is not a coreset CSV (header {header[:3]})")
        ids, weights, prov, pts = [], [], [], []
        for lineno, row in enumerate(reader, start=1):
            try:
                ids.append(int(row[0]))
                weights.append(float(row[1]))
                prov.append(row[2])
                pts.append([float(v) for v in row[3:]])
            except (ValueError, IndexError):
                raise InputError(f"{path}: malformed row {lineno}") from None
    dim = len(header) - 3
    return WeightedCoreset(np.asarray(ids, dtype=np.int64),
                           np.asarray(pts, dtype=np.float64).reshape(len(ids), dim),
                           np.asarray(weights), np.asarray(prov, dtype=object))


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    return obj


def write_json(path, payload: dict, config: dict | None = None):
    doc = {"version": version_string()}
    if config is not None:
        doc["config"] = config
    doc.update(payload)
    Path(path).write_text(json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n")


def strip_timings(obj):
    """Copy of a loaded JSON document without wall-clock fields."""
    if isinstance(obj, dict):
        return {k: strip_timings(v) for k, v in obj.items() if k not in TIMING_KEYS}
    if isinstance(obj, list):
        return [strip_timings(v) for v in obj]
    return obj


def write_rows_csv(path, rows: list[dict], config: dict | None = None):
    """Table CSV; config and version ride along as leading ``#`` comment lines."""
    with Path(path).open("w", newline="") as fh:
        _write_preamble(fh, config)
        if not rows:
            return
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        for row in rows:
            w.writerow({k: _fmt(v) if isinstance(v, float) else v for k, v in row.items()})


def sweep_rows(tables: dict) -> list[dict]:
    rows = []
    for method, table in tables.items():
        for r in table:
            row = {"method": method, r.parameter: r.value, "mean_error": r.mean_error,
                   "max_error": r.max_error, "variance": r.variance,
                   "repetitions": r.repetitions, "mean_size": r.mean_size}
            for t, v in r.mean_error_by_t.items():
                row[f"mean_error_{t}"] = v
            for t, v in r.max_error_by_t.items():
                row[f"max_error_{t}"] = v
            rows.append(row)
    return rows
