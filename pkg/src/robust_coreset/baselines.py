"""Comparison coresets: uniform (US), outlier-aware uniform (OAUS), sensitivity (SS).

SS is the usual practical sensitivity-sampling recipe driven by the
tri-criteria solution, not an exact port of the exponential-size
weighted-clustering construction.
"""
from __future__ import annotations

import numpy as np

from . import _accel
from .approx import find_outliers, tri_criteria_approx
from .core import Dataset, InputError, pow_from_sq
from .coreset import OUTLIER, SAMPLED, WeightedCoreset, _tagged


def uniform_sampling_coreset(X: Dataset, N: int, seed=0) -> WeightedCoreset:
    n = len(X)
    if not 1 <= N <= n:
        raise InputError(f"N={N} must lie in [1, {n}]")
    rng = np.random.default_rng(seed)
    if N == n:
        return _tagged(X, np.arange(n), X.weights, SAMPLED)
    pick = np.sort(rng.choice(n, size=N, replace=False))
    return _tagged(X, pick, np.full(N, X.total_weight / N), SAMPLED)


def outlier_aware_uniform(X: Dataset, k: int, z, m: int, N: int, seed=0, *,
                          beta=2.0, gamma=2.0, centers=None) -> WeightedCoreset:
    n = len(X)
    if N <= m or N > n:
        raise InputError(f"N={N} must lie in ({m}, {n}]")
    if centers is None:
        centers = tri_criteria_approx(X, k, z, m, beta, gamma,
                                      seed=np.random.SeedSequence(seed, spawn_key=(0,))).centers
    out = find_outliers(X, centers, m).full_index(X.weights)
    rest = np.setdiff1d(np.arange(n), out)
    outliers = _tagged(X, out, X.weights[out], OUTLIER)
    need = N - out.size
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1,)))
    if need >= rest.size:
        sample = _tagged(X, rest, X.weights[rest], SAMPLED)
    else:
        pick = np.sort(rng.choice(rest.size, size=need, replace=False))
        mass = float(np.sum(X.weights[rest]))
        sample = _tagged(X, rest[pick], np.full(need, mass / need), SAMPLED)
    return WeightedCoreset.concat([outliers, sample], X.dim)


def sensitivities(X: Dataset, centers, z, m) -> np.ndarray:
    """Sensitivity upper-bound proxy per point; outliers of the center set get 1."""
    labels, sq = _accel.nearest_center(X.points, centers)
    out = find_outliers(X, centers, m).index if m > 0 else np.zeros(0, dtype=np.int64)
    inl = np.ones(len(X), dtype=bool)
    inl[out] = False
    dz = pow_from_sq(sq, z)
    cost = float(np.sum((X.weights * dz)[inl]))
    mass = np.bincount(labels[inl], weights=X.weights[inl], minlength=centers.shape[0])
    sigma = np.ones(len(X))
    if cost > 0:
        sigma[inl] = X.weights[inl] * dz[inl] / cost
    else:
        sigma[inl] = 0.0
    cl = mass[labels[inl]]
    sigma[inl] += np.divide(X.weights[inl], cl, out=np.zeros(cl.size), where=cl > 0)
    return sigma


def sensitivity_sampling_coreset(X: Dataset, k: int, z, m: int, N: int, seed=0, *,
                                 beta=2.0, gamma=2.0, centers=None) -> WeightedCoreset:
    """Importance sampling with replacement; repeated draws are merged."""
    if N < 1:
        raise InputError("N must be positive")
    if centers is None:
        centers = tri_criteria_approx(X, k, z, m, beta, gamma,
                                      seed=np.random.SeedSequence(seed, spawn_key=(0,))).centers
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1,)))
    _, sq = _accel.nearest_center(X.points, centers)
    if not np.any(sq > 0):
        # zero-cost data: every sensitivity is the same
        sigma = X.weights.copy()
    else:
        sigma = sensitivities(X, centers, z, m)
    p = sigma / np.sum(sigma)
    cum = np.cumsum(p)
    draws = np.searchsorted(cum, rng.random(N) * cum[-1], side="right")
    draws = np.minimum(draws, len(X) - 1)
    picked, counts = np.unique(draws, return_counts=True)
    w = counts * X.weights[picked] / (N * p[picked])
    return _tagged(X, picked, w, SAMPLED)
