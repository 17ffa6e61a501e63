"""CSV ingestion and a synthetic Gaussian-mixture generator with planted outliers."""
from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .core import Dataset, InputError


class DataError(InputError):
    pass


def _resolve_columns(header, columns):
    if columns is None:
        return list(range(len(header)))
    resolved = []
    for col in columns:
        col = str(col).strip()
        if col in header:
            resolved.append(header.index(col))
        elif col.lstrip("-").isdigit() and 0 <= int(col) < len(header):
            resolved.append(int(col))
        else:
            raise DataError(f"unknown column {col!r}; header has {header}")
    return resolved


def load_csv(path, columns=None, subsample: int | None = None, seed=0,
             standardize: bool = False, min_points: int = 1) -> Dataset:
    """Read selected numeric columns of a headed CSV file into a unit-weight Dataset.

    Non-numeric or missing cells abort with the 1-based data row number.
    ``subsample`` draws that many rows uniformly without replacement and keeps
    them in file order; ids are the original data row numbers (0-based).
    """
    path = Path(path)
    try:
        fh = path.open(newline="")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path} is empty") from None
        cols = _resolve_columns(header, columns)
        rows = []
        for lineno, row in enumerate(reader, start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            values = []
            for c in cols:
                cell = row[c].strip() if c < len(row) else ""
                try:
                    v = float(cell)
                except ValueError:
                    raise DataError(f"row {lineno}: column {header[c]!r} is not numeric: {cell!r}") from None
                if not math.isfinite(v):
                    raise DataError(f"row {lineno}: column {header[c]!r} is not finite: {cell!r}")
                values.append(v)
            rows.append(values)
    pts = np.asarray(rows, dtype=np.float64).reshape(len(rows), len(cols))
    ids = np.arange(len(rows), dtype=np.int64)
    if subsample is not None and subsample < len(rows):
        rng = np.random.default_rng(seed)
        keep = np.sort(rng.choice(len(rows), size=int(subsample), replace=False))
        pts, ids = pts[keep], ids[keep]
    if len(pts) < min_points:
        raise DataError(f"{path} has {len(pts)} rows, need at least {min_points}")
    if standardize and len(pts):
        std = pts.std(axis=0)
        std[std == 0] = 1.0
        pts = (pts - pts.mean(axis=0)) / std
    return Dataset(pts, None, ids)


def write_csv(path, X: Dataset, header=None):
    header = header or [f"x{j}" for j in range(X.dim)]
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in X.points:
            w.writerow([repr(float(v)) for v in row])


@dataclass(frozen=True)
class SynthSpec:
    clusters: int = 5
    points_per_cluster: int = 1000
    dim: int = 5
    separation: float = 10.0  # center coordinates uniform in [-separation, separation]
    spread: float = 1.0  # per-coordinate std of each Gaussian
    outliers: int = 0
    outlier_scale: float = 10.0  # outliers sit beyond scale x max inlier radius
    seed: int = 0

    def to_json(self):
        return asdict(self)

    @classmethod
    def parse(cls, text: str) -> "SynthSpec":
        """Parse ``key=value,key=value`` (keys as field names, short forms allowed)."""
        alias = {"k": "clusters", "n": "points_per_cluster", "d": "dim", "sep": "separation",
                 "m": "outliers", "scale": "outlier_scale", "std": "spread"}
        fields = cls.__dataclass_fields__
        kwargs = {}
        for part in filter(None, (p.strip() for p in text.split(","))):
            if "=" not in part:
                raise DataError(f"bad synth spec entry {part!r}")
            key, val = (s.strip() for s in part.split("=", 1))
            key = alias.get(key, key)
            if key not in fields:
                raise DataError(f"unknown synth spec key {key!r}")
            kwargs[key] = int(val) if fields[key].type in ("int", int) else float(val)
        return cls(**kwargs)


@dataclass(frozen=True)
class SynthData:
    dataset: Dataset
    centers: np.ndarray
    outlier_index: np.ndarray


def synth(spec: SynthSpec) -> SynthData:
    """Gaussian mixture plus uniformly oriented far outliers.

    Outliers lie at distance ``r`` from the inlier centroid with ``r`` uniform
    in ``(R, 2R]``, ``R = outlier_scale * max inlier distance to the centroid``.
    Returns the dataset (outliers last) and the mixture centers.
    """
    if spec.clusters < 1 or spec.points_per_cluster < 1 or spec.dim < 1 or spec.outliers < 0:
        raise DataError(f"invalid synth spec {spec}")
    rng = np.random.default_rng(spec.seed)
    centers = rng.uniform(-spec.separation, spec.separation, size=(spec.clusters, spec.dim))
    blobs = [c + spec.spread * rng.standard_normal((spec.points_per_cluster, spec.dim)) for c in centers]
    inliers = np.vstack(blobs)
    centroid = inliers.mean(axis=0)
    radius = float(np.max(np.linalg.norm(inliers - centroid, axis=1)))
    far = np.zeros((spec.outliers, spec.dim))
    if spec.outliers:
        direction = rng.standard_normal((spec.outliers, spec.dim))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        r = spec.outlier_scale * max(radius, 1e-12) * (2.0 - rng.random(spec.outliers))
        far = centroid + direction * r[:, None]
    pts = np.vstack([inliers, far])
    n_in = inliers.shape[0]
    return SynthData(Dataset(pts), centers, np.arange(n_in, n_in + spec.outliers))
