"""Outlier-aware Lloyd (LL) for robust means and single-swap local search (LS) for robust median.

Both accept weighted inputs so they can run directly on a coreset.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import _accel
from .approx import dz_seeding
from .core import (
    Dataset,
    InputError,
    outlier_mass,
    pow_from_sq,
    robust_cost,
    robust_cost_columns,
    robust_cost_from_powers,
)


@dataclass
class SolveResult:
    centers: np.ndarray
    cost_on_input: float
    iterations: int
    wall_time: float
    trace: list = field(default_factory=list)

    def to_json(self):
        return {
            "centers": self.centers.tolist(),
            "cost_on_input": self.cost_on_input,
            "iterations": self.iterations,
            "wall_time": self.wall_time,
            "trace": list(self.trace),
        }


def robust_seed(X: Dataset, k: int, m=0, z=2, seed=0, gamma=1.0) -> np.ndarray:
    """k centers by outlier-aware D^z sampling (gamma*m far mass ignored each round)."""
    if len(X) == 0:
        raise InputError("empty dataset")
    if not 1 <= k <= len(X):
        raise InputError(f"k={k} must lie in [1, {len(X)}]")
    rng = np.random.default_rng(seed)
    trim = min(gamma * m, X.total_weight)
    chosen = dz_seeding(X, k, z, trim, rng)
    return X.points[chosen].copy()


def lloyd_with_outliers(X: Dataset, init, k: int | None = None, m=0, max_iters: int = 100,
                        tol: float = 1e-6, z=2) -> SolveResult:
    """Robust k-means: trim the m furthest mass, assign, recenter; repeat.

    Stops once the relative cost improvement of an iteration drops below
    ``tol``. An empty cluster is moved onto the furthest remaining inlier.
    """
    if z != 2:
        raise InputError(f"the mean update needs z = 2, got z={z}")
    start = time.perf_counter()
    C = np.array(init, dtype=np.float64)
    if k is not None and C.shape[0] != k:
        raise InputError(f"init has {C.shape[0]} centers, expected {k}")
    k = C.shape[0]
    if m < 0 or m > X.total_weight:
        raise InputError(f"m={m} must lie in [0, {X.total_weight}]")
    pts, w = X.points, X.weights

    def evaluate(C):
        labels, sq = _accel.nearest_center(pts, C)
        kept = w - outlier_mass(sq, w, X.ids, m)
        return labels, sq, kept, float(np.sum(kept * sq))

    labels, sq, kept, cost = evaluate(C)
    trace = [cost]
    iterations = 0
    while iterations < max_iters:
        iterations += 1
        sums, mass = _accel.weighted_sums(pts, labels, kept, k)
        new = C.copy()
        full = mass > 0
        new[full] = sums[full] / mass[full][:, None]
        for i in np.flatnonzero(~full):
            live = np.flatnonzero(kept > 0)
            if live.size == 0:
                break
            far = live[np.argmax(sq[live])]
            new[i] = pts[far]
            sq[far] = 0.0
        labels, sq, kept, new_cost = evaluate(new)
        if new_cost > cost:
            # rounding can make a converged step tick upward; keep the old centers
            break
        improvement = (cost - new_cost) / cost if cost > 0 else 0.0
        C, cost = new, new_cost
        trace.append(cost)
        if improvement < tol:
            break
    return SolveResult(C, cost, iterations, time.perf_counter() - start, trace)


def candidate_pool(X: Dataset, size: int = 100, seed=0) -> np.ndarray:
    if not 1 <= size <= len(X):
        raise InputError(f"pool size {size} must lie in [1, {len(X)}]")
    rng = np.random.default_rng(seed)
    if size == len(X):
        return X.points.copy()
    pick = np.sort(rng.choice(len(X), size=size, replace=False))
    return X.points[pick].copy()


def _candidate_powers(X: Dataset, candidates, z) -> np.ndarray:
    """Matrix (n, |candidates|) of dist**z from every point to every candidate."""
    cols = np.empty((len(X), candidates.shape[0]))
    for j, c in enumerate(candidates):
        cols[:, j] = pow_from_sq(_accel.sqdist_to_point_np(X.points, c), z)
    return cols


def local_search_robust_median(X: Dataset, candidates, k: int, m=0, z=1, max_iters: int = 100,
                               improvement_tol: float = 1e-4) -> SolveResult:
    """Best-improvement single-swap local search over a fixed candidate pool.

    Starts from the greedy k-subset (one candidate at a time, each the best
    addition) and accepts a swap only when it cuts the robust cost by a
    factor of at least ``1 - improvement_tol``.
    """
    start = time.perf_counter()
    candidates = np.asarray(candidates, dtype=np.float64)
    if candidates.shape[0] < k:
        raise InputError(f"{candidates.shape[0]} candidates for k={k}")
    if m < 0 or m > X.total_weight:
        raise InputError(f"m={m} must lie in [0, {X.total_weight}]")
    D = _candidate_powers(X, candidates, z)
    w = X.weights
    unit = bool(np.all(w == 1.0))
    n_cand = candidates.shape[0]

    def best_addition(base, exclude):
        """(cost, candidate) of the cheapest column to add to ``base``."""
        best_c, best_j = np.inf, -1
        for lo in range(0, n_cand, block):
            cols = np.arange(lo, min(lo + block, n_cand))
            costs = robust_cost_columns(np.minimum(base[:, None], D[:, cols]), w, m, unit)
            costs[np.isin(cols, exclude)] = np.inf
            j = int(np.argmin(costs))
            if costs[j] < best_c:
                best_c, best_j = float(costs[j]), int(cols[j])
        return best_c, best_j

    block = max(1, min(n_cand, 2_000_000 // max(len(X), 1)))
    chosen: list[int] = []
    current = np.full(len(X), np.inf)
    for _ in range(k):
        _, j = best_addition(current, chosen)
        chosen.append(j)
        current = np.minimum(current, D[:, j])
    cost = robust_cost_from_powers(current, w, m, unit)
    trace = [cost]
    iterations = 0
    while iterations < max_iters and len(chosen) < n_cand:
        iterations += 1
        best = (cost, None, None)
        for pos in range(k):
            others = [chosen[i] for i in range(k) if i != pos]
            base = D[:, others].min(axis=1) if others else np.full(len(X), np.inf)
            c, j = best_addition(base, chosen)
            if c < best[0]:
                best = (c, pos, j)
        if best[1] is None or best[0] > (1.0 - improvement_tol) * cost:
            break
        chosen[best[1]] = best[2]
        cost = best[0]
        trace.append(cost)
    centers = candidates[chosen].copy()
    return SolveResult(centers, robust_cost(X, centers, z, m).cost, iterations,
                       time.perf_counter() - start, trace)
