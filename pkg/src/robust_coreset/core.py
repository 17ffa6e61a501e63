"""Weighted point sets and the exact robust clustering cost.

``robust_cost`` removes exactly ``m`` units of weight, the mass furthest from
the centers, splitting one boundary point when needed, and returns the
``z``-th power cost of what is left.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import _accel


class InputError(ValueError):
    """Raised on invalid arguments (dimension mismatch, bad weights, bad m)."""


@dataclass(frozen=True)
class Dataset:
    points: np.ndarray
    weights: np.ndarray = None
    ids: np.ndarray = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2:
            raise InputError("points must be a 2-d array")
        n = pts.shape[0]
        if n and pts.shape[1] < 1:
            raise InputError("points must have at least one coordinate")
        if not np.all(np.isfinite(pts)):
            raise InputError("points must be finite")
        w = np.ones(n) if self.weights is None else np.asarray(self.weights, dtype=np.float64)
        ids = np.arange(n, dtype=np.int64) if self.ids is None else np.asarray(self.ids, dtype=np.int64)
        if w.shape != (n,) or ids.shape != (n,):
            raise InputError("points, weights and ids must have equal length")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise InputError("weights must be finite and nonnegative")
        for name, arr in (("points", pts), ("weights", w), ("ids", ids)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self):
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def total_weight(self) -> float:
        return float(np.sum(self.weights))

    def subset(self, index) -> "Dataset":
        index = np.asarray(index)
        return Dataset(self.points[index], self.weights[index], self.ids[index])

    @classmethod
    def from_points(cls, points, weights=None) -> "Dataset":
        return cls(np.asarray(points, dtype=np.float64), weights)


@dataclass(frozen=True)
class RobustCostResult:
    cost: float
    outlier_mass_removed: float
    # (id, removed weight) of the one point that is only partially removed
    boundary_point: tuple[int, float] | None = None
    removed: np.ndarray = field(default=None, repr=False)


def as_centers(C, dim: int | None = None) -> np.ndarray:
    C = np.asarray(C, dtype=np.float64)
    if C.ndim == 1:
        C = C.reshape(-1, 1) if dim == 1 else C.reshape(1, -1)
    if C.ndim != 2 or C.shape[0] == 0:
        raise InputError("center set must be a nonempty 2-d array")
    if dim is not None and C.shape[1] != dim:
        raise InputError(f"center dimension {C.shape[1]} does not match data dimension {dim}")
    return C


def _as_dataset(X) -> Dataset:
    return X if isinstance(X, Dataset) else Dataset(X)


def _check_z(z):
    if not z >= 1:
        raise InputError(f"z must be >= 1, got {z}")


def pow_from_sq(sq: np.ndarray, z: float) -> np.ndarray:
    """``dist**z`` from squared distances; z=1 and z=2 take exact fast paths."""
    if z == 2:
        return sq
    if z == 1:
        return np.sqrt(sq)
    return sq ** (0.5 * z)


def nearest_center(p, C) -> tuple[int, float]:
    p = np.asarray(p, dtype=np.float64).reshape(1, -1)
    C = as_centers(C, p.shape[1])
    labels, sq = _accel.nearest_center(p, C)
    return int(labels[0]), float(math.sqrt(sq[0]))


def assign(X, C) -> tuple[np.ndarray, np.ndarray]:
    """Nearest-center labels and Euclidean distances for every point."""
    X = _as_dataset(X)
    C = as_centers(C, X.dim)
    if len(X) == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    labels, sq = _accel.nearest_center(X.points, C)
    return labels, np.sqrt(sq)


def point_costs(X, C, z) -> np.ndarray:
    """Per-point ``dist(x, C)**z`` (unweighted)."""
    _check_z(z)
    X = _as_dataset(X)
    C = as_centers(C, X.dim)
    if len(X) == 0:
        return np.zeros(0)
    _, sq = _accel.nearest_center(X.points, C)
    return pow_from_sq(sq, z)


def cost_vanilla(X, C, z) -> float:
    X = _as_dataset(X)
    return float(np.sum(X.weights * point_costs(X, C, z)))


def outlier_mass(dist, weights, ids, m) -> np.ndarray:
    """Weight removed from each point when discarding the ``m`` furthest units of mass.

    Equal distances lose mass from the larger id first.
    """
    total = float(np.sum(weights))
    if m < 0:
        raise InputError(f"m must be nonnegative, got {m}")
    if m > total * (1 + 1e-12) + 1e-12:
        raise InputError(f"m={m} exceeds total weight {total}")
    removed = np.zeros(len(weights))
    if m == 0 or len(weights) == 0:
        return removed
    order = np.lexsort((-np.asarray(ids), -np.asarray(dist)))
    w_sorted = weights[order]
    before = np.cumsum(w_sorted) - w_sorted
    take = np.clip(m - before, 0.0, w_sorted)
    removed[order] = take
    return removed


def robust_cost(X, C, z, m) -> RobustCostResult:
    _check_z(z)
    X = _as_dataset(X)
    C = as_centers(C, X.dim)
    if len(X) == 0:
        if m > 0:
            raise InputError("m exceeds total weight of an empty dataset")
        return RobustCostResult(0.0, 0.0, None, np.zeros(0))
    _, sq = _accel.nearest_center(X.points, C)
    removed = outlier_mass(sq, X.weights, X.ids, m)
    kept = X.weights - removed
    cost = float(np.sum(kept * pow_from_sq(sq, z)))
    partial = np.flatnonzero((removed > 0) & (removed < X.weights))
    boundary = None
    if partial.size:
        i = int(partial[0])
        boundary = (int(X.ids[i]), float(removed[i]))
    return RobustCostResult(cost, float(np.sum(removed)), boundary, removed)


def robust_cost_from_powers(dz, weights, m, unit_weights: bool | None = None) -> float:
    """Robust cost from precomputed per-point ``dist**z`` values.

    Ties are irrelevant for the value, so unit-weight inputs with integer m use
    a selection instead of a full sort.
    """
    n = dz.shape[0]
    if m <= 0:
        return float(np.sum(weights * dz))
    if unit_weights is None:
        unit_weights = bool(np.all(weights == 1.0))
    if unit_weights and float(m).is_integer():
        m = int(m)
        if m >= n:
            return 0.0
        kept = np.partition(dz, n - m - 1)[: n - m]
        return float(np.sum(kept))
    order = np.argsort(-dz, kind="stable")
    w_sorted = weights[order]
    before = np.cumsum(w_sorted) - w_sorted
    kept = w_sorted - np.clip(m - before, 0.0, w_sorted)
    return float(np.sum(kept * dz[order]))


def robust_cost_columns(dz, weights, m, unit_weights: bool | None = None) -> np.ndarray:
    """Robust cost of every column of a (points, candidates) matrix of ``dist**z``."""
    n, cols = dz.shape
    if m <= 0:
        return weights @ dz
    if unit_weights is None:
        unit_weights = bool(np.all(weights == 1.0))
    if unit_weights and float(m).is_integer():
        m = int(m)
        if m >= n:
            return np.zeros(cols)
        kept = np.partition(dz, n - m - 1, axis=0)[: n - m]
        return kept.sum(axis=0)
    rows = np.ascontiguousarray(dz.T)
    order = np.argsort(-rows, axis=1)
    w_sorted = weights[order]
    before = np.cumsum(w_sorted, axis=1) - w_sorted
    kept = w_sorted - np.clip(m - before, 0.0, w_sorted)
    return np.sum(kept * np.take_along_axis(rows, order, axis=1), axis=1)


def robust_costs_multi(dz, weights, ms) -> list[float]:
    """Robust cost at several outlier budgets from one sort."""
    order = np.argsort(-dz, kind="stable")
    w_sorted = weights[order]
    d_sorted = dz[order]
    before = np.cumsum(w_sorted) - w_sorted
    out = []
    for m in ms:
        kept = w_sorted - np.clip(m - before, 0.0, w_sorted)
        out.append(float(np.sum(kept * d_sorted)))
    return out


def brute_force_robust_cost(X, C, z, m: int, max_points: int = 12) -> float:
    """Minimum of cost over every size-m outlier subset, by enumeration (test oracle)."""
    _check_z(z)
    X = _as_dataset(X)
    C = as_centers(C, X.dim)
    n = len(X)
    if n > max_points:
        raise InputError(f"brute force refuses n={n} > {max_points}")
    if not np.all(X.weights == 1.0):
        raise InputError("brute force needs unit weights")
    if int(m) != m or not 0 <= m <= n:
        raise InputError(f"m must be an integer in [0, {n}]")
    per_point = []
    for x in X.points:
        d = min(math.dist(x, c) for c in C)
        per_point.append(d**z)
    best = math.inf
    for drop in itertools.combinations(range(n), int(m)):
        dropped = set(drop)
        best = min(best, math.fsum(v for i, v in enumerate(per_point) if i not in dropped))
    return best


def robust_cost_integral(X, C, z, m, quadrature_steps: int = 1) -> float:
    """Robust cost through the layer-cake integral over ball radii.

    Integrates ``z u^(z-1) (W - m - w(balls(C, u)))^+`` exactly: the bracket is
    constant between consecutive distinct distances, so each segment
    contributes ``(mass outside - m)^+ * (b^z - a^z)``. ``quadrature_steps``
    splits every segment into that many equal pieces.
    """
    _check_z(z)
    if quadrature_steps < 1:
        raise InputError("quadrature_steps must be >= 1")
    X = _as_dataset(X)
    C = as_centers(C, X.dim)
    total = X.total_weight
    if m < 0 or m > total * (1 + 1e-12) + 1e-12:
        raise InputError(f"m={m} outside [0, {total}]")
    if len(X) == 0:
        return 0.0
    _, sq = _accel.nearest_center(X.points, C)
    dist = np.sqrt(sq)
    radii, inverse = np.unique(dist, return_inverse=True)
    mass_at = np.bincount(inverse, weights=X.weights, minlength=radii.size)
    # mass strictly outside radius radii[j]
    outside = np.concatenate([np.cumsum(mass_at[::-1])[::-1][1:], [0.0]])
    lower = np.concatenate([[0.0], radii[:-1]])
    # on (lower[j], radii[j]) the mass outside the ball is everything at radius >= radii[j]
    height = np.clip(outside + mass_at - m, 0.0, None)
    terms = []
    for j in np.flatnonzero(height > 0):
        a, b = lower[j], radii[j]
        if quadrature_steps == 1:
            terms.append(height[j] * (b**z - a**z))
        else:
            knots = np.linspace(a, b, quadrature_steps + 1)
            terms.append(height[j] * math.fsum(np.diff(knots**z)))
    return math.fsum(terms)


def check_triangle_lemma(a: float, b: float, delta: float, z: float) -> tuple[bool, bool]:
    """Evaluate both generalized triangle inequalities for ``(a + b)**z``."""
    lhs = (a + b) ** z
    first = (1 + delta) ** (z - 1) * a**z + (1 + 1 / delta) ** (z - 1) * b**z
    second = (1 + delta) * a**z + (3 * z / delta) ** (z - 1) * b**z
    slack = 1e-12 * max(1.0, lhs)
    return lhs <= first + slack, lhs <= second + slack
