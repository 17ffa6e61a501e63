"""Dyadic rings around a cluster center and their grouping into low-cost groups.

A cluster is cut into rings ``2**(i-1) < dist <= 2**i``. Rings carrying at
least a ``t`` fraction of the cluster cost are kept as rings; runs of the
remaining light rings are merged greedily into groups of cost at most
``t * cluster cost``. Points sitting exactly on the center form their own
zero-cost group.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _accel
from .core import Dataset, InputError, as_centers

# dyadic index of the points at distance zero
NEG_INF = -(2**62)


def ring_index(p, c) -> int:
    d = math.dist(np.atleast_1d(p), np.atleast_1d(c))
    return int(ring_indices(np.array([d]))[0])


def ring_indices(dist: np.ndarray) -> np.ndarray:
    """Unique i with ``2**(i-1) < d <= 2**i``; ``NEG_INF`` for d == 0."""
    dist = np.asarray(dist, dtype=np.float64)
    mant, expo = np.frexp(dist)  # d = mant * 2**expo, mant in [0.5, 1)
    idx = np.where(mant == 0.5, expo - 1, expo).astype(np.int64)
    idx[dist == 0] = NEG_INF
    return idx


def format_index(i: int):
    return "-inf" if i == NEG_INF else int(i)


@dataclass
class Ring:
    cluster_index: int
    dyadic_index: int
    members: np.ndarray  # row positions into the clustered dataset
    cost: float
    weight: float

    def to_json(self, ids=None):
        return {
            "cluster_index": self.cluster_index,
            "dyadic_index": format_index(self.dyadic_index),
            "member_ids": (ids[self.members] if ids is not None else self.members).tolist(),
            "ring_cost": self.cost,
        }


@dataclass
class Group:
    cluster_index: int
    interval: tuple[int, int]
    members: np.ndarray
    cost: float
    weight: float

    def to_json(self, ids=None):
        return {
            "cluster_index": self.cluster_index,
            "interval": [format_index(self.interval[0]), format_index(self.interval[1])],
            "member_ids": (ids[self.members] if ids is not None else self.members).tolist(),
            "group_cost": self.cost,
        }


@dataclass
class Decomposition:
    centers: np.ndarray
    labels: np.ndarray
    rings: list[Ring] = field(default_factory=list)
    groups: list[Group] = field(default_factory=list)
    threshold: float = 1.0
    cluster_costs: np.ndarray = None

    def stats(self) -> dict:
        per_cluster = []
        for ci in range(self.centers.shape[0]):
            per_cluster.append({
                "cluster": ci,
                "size": int(np.sum(self.labels == ci)),
                "rings": sum(r.cluster_index == ci for r in self.rings),
                "groups": sum(g.cluster_index == ci for g in self.groups),
            })
        return {
            "threshold": self.threshold,
            "rings": len(self.rings),
            "groups": len(self.groups),
            "per_cluster": per_cluster,
        }

    def to_json(self, ids=None) -> dict:
        return {
            "threshold": self.threshold,
            "clusters": [
                {"center": c.tolist(),
                 "member_ids": (ids[self.labels == i] if ids is not None
                                else np.flatnonzero(self.labels == i)).tolist()}
                for i, c in enumerate(self.centers)
            ],
            "rings": [r.to_json(ids) for r in self.rings],
            "groups": [g.to_json(ids) for g in self.groups],
        }


def partition_clusters(X: Dataset, C) -> np.ndarray:
    """Nearest-center label of every point (smallest index on ties)."""
    C = as_centers(C, X.dim)
    if len(X) == 0:
        return np.zeros(0, dtype=np.int64)
    labels, _ = _accel.nearest_center(X.points, C)
    return labels


def decompose_cluster(dist, weights, z, t, cluster_index: int = 0, members=None):
    """Split one cluster into heavy rings and groups of consecutive light rings.

    ``dist`` holds distances of the cluster's points to its center and
    ``members`` their row positions (defaults to ``arange``). Returns
    ``(rings, groups)``.
    """
    if not 0 < t <= 1:
        raise InputError(f"threshold fraction t must lie in (0, 1], got {t}")
    dist = np.asarray(dist, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    members = np.arange(dist.size) if members is None else np.asarray(members)
    if dist.size == 0:
        return [], []
    point_cost = weights * (dist if z == 1 else dist**z)
    idx = ring_indices(dist)
    order = np.argsort(idx, kind="stable")
    uniq, starts = np.unique(idx[order], return_index=True)
    bounds = np.append(starts, dist.size)
    ring_cost = np.array([np.sum(point_cost[order[a:b]]) for a, b in zip(bounds[:-1], bounds[1:])])
    ring_weight = np.array([np.sum(weights[order[a:b]]) for a, b in zip(bounds[:-1], bounds[1:])])
    total = float(np.sum(point_cost))
    limit = t * total

    rings, groups = [], []
    run = []  # light ring positions awaiting a group
    run_cost = 0.0

    def close_run():
        nonlocal run, run_cost
        if run:
            sel = np.concatenate([order[bounds[j]:bounds[j + 1]] for j in run])
            groups.append(Group(cluster_index, (int(uniq[run[0]]), int(uniq[run[-1]])),
                                members[sel], run_cost, float(np.sum(ring_weight[run]))))
        run, run_cost = [], 0.0

    for j, i in enumerate(uniq):
        sel = order[bounds[j]:bounds[j + 1]]
        if i == NEG_INF:
            groups.append(Group(cluster_index, (NEG_INF, NEG_INF), members[sel], 0.0,
                                float(ring_weight[j])))
            continue
        c = float(ring_cost[j])
        if total > 0 and c >= limit:
            close_run()
            rings.append(Ring(cluster_index, int(i), members[sel], c, float(ring_weight[j])))
            continue
        if run and run_cost + c > limit:
            close_run()
        run.append(j)
        run_cost += c
    close_run()
    return rings, groups


def decompose(X: Dataset, C, z, t) -> Decomposition:
    """Cluster X around C and decompose every cluster."""
    C = as_centers(C, X.dim)
    labels, sq = (_accel.nearest_center(X.points, C) if len(X)
                  else (np.zeros(0, dtype=np.int64), np.zeros(0)))
    dist = np.sqrt(sq)
    rings, groups = [], []
    costs = np.zeros(C.shape[0])
    for ci in range(C.shape[0]):
        mem = np.flatnonzero(labels == ci)
        if mem.size == 0:
            continue
        r, g = decompose_cluster(dist[mem], X.weights[mem], z, t, ci, mem)
        rings.extend(r)
        groups.extend(g)
        costs[ci] = sum(x.cost for x in r) + sum(x.cost for x in g)
    return Decomposition(C, labels, rings, groups, float(t), costs)
