"""Robust coreset construction: outliers + uniform ring samples + two-point groups."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import _accel
from .approx import find_outliers, tri_criteria_approx
from .core import Dataset, InputError, pow_from_sq
from .decompose import NEG_INF, Decomposition, decompose

OUTLIER = "OUTLIER"
RING_SAMPLE = "RING_SAMPLE"
GROUP_ENDPOINT = "GROUP_ENDPOINT"
SAMPLED = "SAMPLED"  # baseline constructions


class CoresetSizeError(InputError):
    def __init__(self, requested: int, minimum: int):
        super().__init__(f"target size N={requested} is below the minimum feasible size {minimum}")
        self.requested = requested
        self.minimum = minimum


@dataclass(frozen=True)
class WeightedCoreset:
    ids: np.ndarray
    points: np.ndarray
    weights: np.ndarray
    provenance: np.ndarray

    def __len__(self):
        return self.ids.shape[0]

    @property
    def total_weight(self) -> float:
        return float(np.sum(self.weights))

    def as_dataset(self) -> Dataset:
        return Dataset(self.points, self.weights, self.ids)

    @classmethod
    def concat(cls, parts: list["WeightedCoreset"], dim: int) -> "WeightedCoreset":
        parts = [p for p in parts if len(p)]
        if not parts:
            return cls(np.zeros(0, dtype=np.int64), np.zeros((0, dim)), np.zeros(0),
                       np.zeros(0, dtype=object))
        return cls(np.concatenate([p.ids for p in parts]),
                   np.vstack([p.points for p in parts]),
                   np.concatenate([p.weights for p in parts]),
                   np.concatenate([p.provenance for p in parts]))


@dataclass
class CoresetBuildReport:
    target_size: int
    actual_size: int
    threshold: float
    sample_size: int
    outliers: int
    rings: int
    groups: int
    degenerate_groups: int
    expanded_groups: int
    minimum_size: int
    tri_criteria_cost: float
    build_time: float
    decomposition: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return dict(self.__dict__)


def _tagged(X: Dataset, index, weights, tag) -> WeightedCoreset:
    index = np.asarray(index, dtype=np.int64)
    return WeightedCoreset(X.ids[index], X.points[index], np.asarray(weights, dtype=np.float64),
                           np.full(index.size, tag, dtype=object))


def two_point_weights(dz, weights):
    """Split group mass between its closest and furthest member.

    ``dz`` are member distances to the center raised to the power z. Returns
    ``(positions, weights, lambdas)``: positions ``[close, far]``, or just
    ``[close]`` when every member sits at the same distance. The larger share
    is summed directly and the smaller one obtained by subtraction, which
    makes the two shares add up to the group weight exactly.
    """
    dz = np.asarray(dz, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    if dz.size == 0:
        raise InputError("empty group")
    close = int(np.argmin(dz))
    far = int(np.argmax(dz))
    lo, hi = dz[close], dz[far]
    total = float(np.sum(w))
    if hi == lo:
        return np.array([close]), np.array([total]), np.ones(dz.size)
    lam = np.clip((hi - dz) / (hi - lo), 0.0, 1.0)
    w_close = float(np.sum(lam * w))
    w_far = float(np.sum((1.0 - lam) * w))
    if w_close >= w_far:
        w_far = total - w_close
    else:
        w_close = total - w_far
    return np.array([close, far]), np.array([w_close, w_far]), lam


def two_point_coreset(points, center, z, weights=None):
    """Two-point coreset of a group with respect to ``center``.

    Returns ``(positions, weights, lambdas)`` indexing into ``points``.
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if points.shape[0] == 0:
        raise InputError("empty group")
    weights = np.ones(points.shape[0]) if weights is None else np.asarray(weights, dtype=np.float64)
    _, sq = _accel.nearest_center(points, np.asarray(center, dtype=np.float64).reshape(1, -1))
    return two_point_weights(pow_from_sq(sq, z), weights)


def uniform_sample_ring(members, weights, s: int, rng: np.random.Generator):
    """Uniform sample of ``s`` ring members without replacement.

    Returns ``(positions, weights)``; each sampled member carries ring weight / s.
    A ring of at most ``s`` members is returned whole with its own weights.
    """
    members = np.asarray(members)
    weights = np.asarray(weights, dtype=np.float64)
    if members.size == 0:
        raise InputError("empty ring")
    if s < 1:
        raise InputError("sample size must be >= 1")
    if s >= members.size:
        return members.copy(), weights.copy()
    pick = np.sort(rng.choice(members.size, size=s, replace=False))
    return members[pick], np.full(s, float(np.sum(weights)) / s)


def minimum_size(ring_sizes, nondegenerate_groups: int, degenerate_groups: int, m_star: int) -> int:
    return int(m_star + len(ring_sizes) + 2 * nondegenerate_groups + degenerate_groups)


def solve_sample_size(ring_sizes, nondegenerate_groups: int, degenerate_groups: int,
                      N: int, m_star: int) -> tuple[int, np.ndarray]:
    """Per-ring sample size s and the per-ring counts that hit size N exactly.

    Picks the largest s with ``m_star + sum(min(s, |R|)) + 2 g + g1 <= N``, then
    hands the remaining slack out one sample at a time to the largest
    unsaturated rings. If every ring is taken whole the total can stay below N.
    """
    sizes = np.asarray(ring_sizes, dtype=np.int64)
    fixed = m_star + 2 * nondegenerate_groups + degenerate_groups
    lowest = fixed + sizes.size
    if N < lowest:
        raise CoresetSizeError(N, lowest)
    budget = N - fixed
    if sizes.size == 0:
        return 0, sizes.copy()
    if budget >= sizes.sum():
        return int(sizes.max()), sizes.copy()
    lo, hi = 1, int(sizes.max())
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if np.minimum(sizes, mid).sum() <= budget:
            lo = mid
        else:
            hi = mid - 1
    s = lo
    counts = np.minimum(sizes, s)
    slack = budget - int(counts.sum())
    if slack > 0:
        room = np.flatnonzero(sizes > s)
        # largest rings first, earlier rings on ties
        room = room[np.argsort(-sizes[room], kind="stable")]
        counts[room[:slack]] += 1
    return s, counts


def _ring_rng(seed, cluster_index, dyadic_index, kind=0):
    key = (int(cluster_index), int(dyadic_index) - NEG_INF) + ((kind,) if kind else ())
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def build_coreset(X: Dataset, k: int, z, m, N: int, seed=0, *, beta=2.0, gamma=2.0,
                  threshold_constant=1.0, centers=None):
    """Build a weighted robust coreset of exactly ``N`` points.

    ``centers`` may supply a precomputed approximate center set; otherwise the
    outlier-aware seeding picks ``ceil(beta k)`` centers with ``gamma m``
    trimmed mass. Only the ``m`` furthest units of mass are kept as outliers;
    the rest of the trimmed mass is clustered with the inliers. When whole
    rings cannot fill N, the largest groups are uniformly resampled with more
    points (up to all their members) until the size is exactly N.
    """
    start = time.perf_counter()
    n = len(X)
    if m < 0 or m > X.total_weight:
        raise InputError(f"m={m} must lie in [0, {X.total_weight}]")
    if N < 1:
        raise InputError("N must be positive")
    if N <= m and m > 0:
        raise CoresetSizeError(N, int(math.ceil(m)) + 1)
    if N > n:
        raise InputError(f"N={N} exceeds the number of points {n}")
    if centers is None:
        approx = tri_criteria_approx(X, k, z, m, beta, gamma,
                                     seed=np.random.SeedSequence(seed, spawn_key=(0,)))
        centers, approx_cost = approx.centers, approx.achieved_cost
    else:
        centers, approx_cost = np.asarray(centers, dtype=np.float64), float("nan")

    outl = find_outliers(X, centers, m)
    out_index = outl.full_index(X.weights)
    inlier_mask = np.ones(n, dtype=bool)
    inlier_mask[out_index] = False
    inliers = np.flatnonzero(inlier_mask)
    m_star = int(out_index.size)

    t = min(1.0, threshold_constant / max(N - m_star, 1))
    dec = decompose(X.subset(inliers), centers, z, t)

    group_rows = [inliers[g.members] for g in dec.groups]
    endpoints = []
    for g, rows in zip(dec.groups, group_rows):
        pos, w, _ = two_point_coreset(X.points[rows], centers[g.cluster_index], z, X.weights[rows])
        endpoints.append((rows[pos], w))
    n_deg = sum(len(e[0]) == 1 for e in endpoints)
    n_nondeg = len(dec.groups) - n_deg

    ring_sizes = [r.members.size for r in dec.rings]
    s, counts = solve_sample_size(ring_sizes, n_nondeg, n_deg, N, m_star)
    ring_parts = []
    for r, c in zip(dec.rings, counts):
        rows = inliers[r.members]
        rng = _ring_rng(seed, r.cluster_index, r.dyadic_index)
        pos, w = uniform_sample_ring(np.arange(rows.size), X.weights[rows], int(c), rng)
        ring_parts.append(_tagged(X, rows[pos], w, RING_SAMPLE))

    # every ring is whole but N is not reached: open up groups, largest first
    deficit = N - (m_star + int(np.sum(counts)) + 2 * n_nondeg + n_deg)
    group_parts = []
    expanded = 0
    order = sorted(range(len(dec.groups)), key=lambda j: -group_rows[j].size)
    replace = {}
    for j in order:
        if deficit <= 0:
            break
        rows = group_rows[j]
        have = len(endpoints[j][0])
        take = min(rows.size - have, deficit)
        if take <= 0:
            continue
        g = dec.groups[j]
        rng = _ring_rng(seed, g.cluster_index, g.interval[0], 1)
        pos, w = uniform_sample_ring(np.arange(rows.size), X.weights[rows], have + take, rng)
        replace[j] = _tagged(X, rows[pos], w, RING_SAMPLE)
        deficit -= take
        expanded += 1
    for j, (rows, w) in enumerate(endpoints):
        group_parts.append(replace[j] if j in replace else _tagged(X, rows, w, GROUP_ENDPOINT))

    parts = [_tagged(X, out_index, X.weights[out_index], OUTLIER)] + ring_parts + group_parts
    S = WeightedCoreset.concat(parts, X.dim)
    report = CoresetBuildReport(
        target_size=int(N),
        actual_size=len(S),
        threshold=t,
        sample_size=int(s),
        outliers=m_star,
        rings=len(dec.rings),
        groups=len(dec.groups),
        degenerate_groups=n_deg,
        expanded_groups=expanded,
        minimum_size=minimum_size(ring_sizes, n_nondeg, n_deg, m_star),
        tri_criteria_cost=approx_cost,
        build_time=time.perf_counter() - start,
        decomposition=dec.stats(),
    )
    return S, report


def union(parts: list[WeightedCoreset]) -> WeightedCoreset:
    """Union of coresets built on disjoint pieces of a dataset."""
    dim = parts[0].points.shape[1] if parts else 1
    return WeightedCoreset.concat(list(parts), dim)
