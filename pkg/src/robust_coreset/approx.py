"""Outlier-aware D^z seeding used as the (alpha, beta, gamma) center set."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _accel
from .core import Dataset, InputError, outlier_mass, pow_from_sq, robust_cost


@dataclass(frozen=True)
class TriCriteriaSolution:
    centers: np.ndarray
    beta: float
    gamma: float
    achieved_cost: float
    center_ids: np.ndarray = None


@dataclass(frozen=True)
class OutlierSet:
    """Mass removed per point; ``ids`` lists every point that lost any mass."""

    ids: np.ndarray
    index: np.ndarray
    mass: np.ndarray

    @property
    def total(self) -> float:
        return float(np.sum(self.mass))

    def full_index(self, weights) -> np.ndarray:
        """Positions whose whole weight is removed."""
        return self.index[self.mass >= weights[self.index]]


def _draw(rng: np.random.Generator, mass: np.ndarray) -> int:
    cum = np.cumsum(mass)
    u = rng.random() * cum[-1]
    i = int(np.searchsorted(cum, u, side="right"))
    i = min(i, mass.size - 1)
    # never land on a zero-mass entry through rounding at the end of cum
    while mass[i] <= 0 and i > 0:
        i -= 1
    return i


def _trimmed(mass_key, weights, ids, budget):
    """Weights left after removing the ``budget`` units with the largest key."""
    if budget <= 0:
        return weights
    return weights - outlier_mass(mass_key, weights, ids, budget)


def dz_seeding(X: Dataset, n_centers: int, z, trim: float, rng: np.random.Generator):
    """Pick ``n_centers`` data points by D^z sampling after trimming ``trim`` far mass.

    The first center is drawn proportionally to weight after trimming the mass
    furthest from the coordinate-wise weighted median. Returns the chosen
    row positions.
    """
    pts, w, ids = X.points, X.weights, X.ids
    median = np.array([_weighted_median(pts[:, j], w) for j in range(X.dim)])
    sq_med = _accel.sqdist_to_point_np(pts, median)
    first_mass = _trimmed(sq_med, w, ids, trim)
    if not np.any(first_mass > 0):
        first_mass = w
    chosen = [_draw(rng, first_mass)]
    current = np.full(len(X), np.inf)
    _accel.min_update(pts, pts[chosen[0]], current)
    for _ in range(1, n_centers):
        kept = _trimmed(current, w, ids, trim)
        mass = kept * pow_from_sq(current, z)
        if not np.any(mass > 0):
            # all surviving mass already sits on centers; any draw is free
            mass = kept if np.any(kept > 0) else w
        idx = _draw(rng, mass)
        chosen.append(idx)
        _accel.min_update(pts, pts[idx], current)
    return np.asarray(chosen, dtype=np.int64)


def _weighted_median(values, weights):
    order = np.argsort(values, kind="stable")
    cum = np.cumsum(weights[order])
    half = 0.5 * cum[-1]
    return float(values[order][np.searchsorted(cum, half)])


def tri_criteria_approx(X: Dataset, k: int, z=2, m=0, beta=2.0, gamma=2.0, seed=0) -> TriCriteriaSolution:
    if len(X) == 0:
        raise InputError("empty dataset")
    if k < 1 or k > len(X):
        raise InputError(f"k={k} must be in [1, {len(X)}]")
    if beta < 1 or gamma < 1 or m < 0:
        raise InputError("need beta >= 1, gamma >= 1, m >= 0")
    total = X.total_weight
    if m > total:
        raise InputError(f"m={m} exceeds total weight {total}")
    trim = min(gamma * m, total)
    n_centers = int(math.ceil(beta * k - 1e-9))
    rng = np.random.default_rng(seed)
    chosen = dz_seeding(X, n_centers, z, trim, rng)
    centers = X.points[chosen].copy()
    cost = robust_cost(X, centers, z, trim).cost
    return TriCriteriaSolution(centers, float(beta), float(gamma), cost, X.ids[chosen].copy())


def find_outliers(X: Dataset, C, count) -> OutlierSet:
    """The ``count`` units of mass furthest from C (fractional boundary allowed)."""
    C = np.asarray(C, dtype=np.float64)
    if C.ndim == 1:
        C = C.reshape(-1, X.dim)
    if C.shape[1] != X.dim:
        raise InputError("center dimension does not match data")
    if count < 0 or count > X.total_weight * (1 + 1e-12) + 1e-12:
        raise InputError(f"count={count} outside [0, {X.total_weight}]")
    _, sq = _accel.nearest_center(X.points, C)
    removed = outlier_mass(sq, X.weights, X.ids, count)
    index = np.flatnonzero(removed > 0)
    return OutlierSet(X.ids[index], index, removed[index])
