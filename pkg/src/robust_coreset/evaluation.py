"""Empirical coreset error, size/outlier sweeps, solver speedup and outlier-count selection."""
from __future__ import annotations

import logging
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _accel
from .approx import tri_criteria_approx
from .baselines import outlier_aware_uniform, sensitivity_sampling_coreset, uniform_sampling_coreset
from .core import Dataset, InputError, pow_from_sq, robust_cost, robust_costs_multi
from .coreset import WeightedCoreset, build_coreset
from .solvers import (
    candidate_pool,
    lloyd_with_outliers,
    local_search_robust_median,
    robust_seed,
)

log = logging.getLogger(__name__)

METHODS = ("OURS", "US", "OAUS", "SS")


def outlier_levels(m) -> tuple:
    """Outlier budgets at which errors are recorded: 0, ceil(m/2), m."""
    return (0, int(math.ceil(m / 2)), m)


@dataclass
class ErrorSample:
    center_set_id: int
    errors: dict  # outlier budget -> relative error (None when the dataset cost is 0)


@dataclass
class SweepRow:
    method: str
    parameter: str
    value: float
    mean_error: float
    max_error: float
    variance: float
    repetitions: int
    mean_error_by_t: dict = field(default_factory=dict)
    max_error_by_t: dict = field(default_factory=dict)
    mean_size: float = 0.0

    def to_json(self):
        return asdict(self)


def random_center_sets(X: Dataset, k: int, count: int = 500, seed=0) -> np.ndarray:
    """``count`` center sets of ``k`` points uniform in the bounding box of X, shape (count, k, d)."""
    if count < 1 or k < 1:
        raise InputError("count and k must be >= 1")
    rng = np.random.default_rng(seed)
    lo = X.points.min(axis=0)
    hi = X.points.max(axis=0)
    return lo + (hi - lo) * rng.random((count, k, X.dim))


class ReferenceCosts:
    """Robust costs of a fixed dataset at several outlier budgets, per center set."""

    def __init__(self, X: Dataset, centers: np.ndarray, z, levels):
        self.X = X
        self.centers = centers
        self.z = z
        self.levels = tuple(levels)
        self.values = robust_cost_table(X, centers, z, self.levels)


def robust_cost_table(X: Dataset, centers: np.ndarray, z, levels) -> np.ndarray:
    """Array (len(centers), len(levels)) of robust costs."""
    out = np.empty((len(centers), len(levels)))
    for i, C in enumerate(centers):
        _, sq = _accel.nearest_center(X.points, C)
        out[i] = robust_costs_multi(pow_from_sq(sq, z), X.weights, levels)
    return out


def max_empirical_error(X, S, centers, z, m, reference: ReferenceCosts | None = None):
    """Maximum relative cost error of S against X over the center sets, at budget m.

    Returns ``(eps_hat, samples)``; each sample records the error at the
    budgets 0, ceil(m/2) and m. Center sets where X costs nothing are skipped.
    """
    if len(centers) == 0:
        raise InputError("no center sets")
    levels = outlier_levels(m)
    if reference is None or reference.levels != levels:
        reference = ReferenceCosts(X, centers, z, levels)
    S_data = S.as_dataset() if isinstance(S, WeightedCoreset) else S
    s_levels = [min(t, S_data.total_weight) for t in levels]
    mine = robust_cost_table(S_data, centers, z, s_levels)
    samples = []
    worst = 0.0
    skipped = 0
    for i in range(len(centers)):
        errs = {}
        for j, t in enumerate(levels):
            ref = reference.values[i, j]
            errs[t] = None if ref == 0 else abs(ref - mine[i, j]) / ref
        if errs[m] is None:
            skipped += 1
        else:
            worst = max(worst, errs[m])
        samples.append(ErrorSample(i, errs))
    if skipped:
        log.info("skipped %d center sets with zero dataset cost", skipped)
    return worst, samples


LEVEL_LABELS = ("t0", "t_half", "t_m")


def max_error_by_level(samples, levels) -> dict:
    """Worst error at each budget, keyed ``t0``, ``t_half``, ``t_m``."""
    out = {}
    for label, t in zip(LEVEL_LABELS, levels):
        vals = [s.errors[t] for s in samples if s.errors[t] is not None]
        out[label] = max(vals) if vals else 0.0
    return out


def derive_seed(seed, *key) -> int:
    """Independent integer seed for a (master seed, key...) pair."""
    return int(np.random.SeedSequence(int(seed), spawn_key=tuple(int(x) for x in key)).generate_state(1)[0])


def make_coreset(method: str, X: Dataset, k: int, z, m, N: int, seed, **opts) -> WeightedCoreset:
    if method == "OURS":
        return build_coreset(X, k, z, m, N, seed, **opts)[0]
    if method == "US":
        return uniform_sampling_coreset(X, N, seed)
    if method == "OAUS":
        return outlier_aware_uniform(X, k, z, m, N, seed)
    if method == "SS":
        return sensitivity_sampling_coreset(X, k, z, m, N, seed)
    raise InputError(f"unknown method {method!r}; choose from {METHODS}")


def _rows(method, parameter, grid, errors, by_t, sizes):
    rows = []
    for value in grid:
        errs = np.asarray(errors[value])
        rows.append(SweepRow(
            method=method,
            parameter=parameter,
            value=value,
            mean_error=float(np.mean(errs)),
            max_error=float(np.max(errs)),
            variance=float(np.var(errs)),
            repetitions=int(errs.size),
            mean_error_by_t={t: float(np.mean(v)) for t, v in by_t[value].items()},
            max_error_by_t={t: float(np.max(v)) for t, v in by_t[value].items()},
            mean_size=float(np.mean(sizes[value])),
        ))
    return rows


def _sweep(X, k, z, settings, parameter, reps, seed, methods, center_count, opts):
    """settings: list of (grid value, m, N)."""
    errors = {meth: {v: [] for v, _, _ in settings} for meth in methods}
    by_t = {meth: {v: {} for v, _, _ in settings} for meth in methods}
    sizes = {meth: {v: [] for v, _, _ in settings} for meth in methods}
    for r in range(reps):
        centers = random_center_sets(X, k, center_count, derive_seed(seed, r, 0))
        refs = {}
        for v, m, N in settings:
            levels = outlier_levels(m)
            if levels not in refs:
                refs[levels] = ReferenceCosts(X, centers, z, levels)
            for mi, meth in enumerate(methods):
                S = make_coreset(meth, X, k, z, m, N, derive_seed(seed, r, 1, mi, int(v)), **(
                    opts if meth == "OURS" else {}))
                eps, samples = max_empirical_error(X, S, centers, z, m, refs[levels])
                errors[meth][v].append(eps)
                sizes[meth][v].append(len(S))
                for t, e in max_error_by_level(samples, levels).items():
                    by_t[meth][v].setdefault(t, []).append(e)
    grid = sorted(v for v, _, _ in settings)
    return {meth: _rows(meth, parameter, grid, errors[meth], by_t[meth], sizes[meth]) for meth in methods}


def size_error_sweep(X: Dataset, k: int, z, m, sizes, reps: int = 1, seed=0, methods=METHODS,
                     center_count: int = 500, **opts) -> dict:
    """Mean/max/variance of the empirical error per target size N, one table per method."""
    settings = [(int(N), m, int(N)) for N in sorted(set(int(s) for s in sizes))]
    return _sweep(X, k, z, settings, "N", reps, seed, tuple(methods), center_count, opts)


def outlier_error_sweep(X: Dataset, k: int, z, m_values, fixed_extra: int = 800, reps: int = 1,
                        seed=0, methods=METHODS, center_count: int = 500, **opts) -> dict:
    """Empirical error per outlier budget m at fixed N - m."""
    settings = [(int(m), int(m), int(m) + fixed_extra) for m in sorted(set(int(v) for v in m_values))]
    return _sweep(X, k, z, settings, "m", reps, seed, tuple(methods), center_count, opts)


@dataclass
class SpeedupReport:
    solver: str
    n: int
    k: int
    z: float
    m: float
    N: int
    cost: float  # full-data solve, measured on X
    cost_prime: float  # coreset solve, measured on X
    T_C: float
    T_S: float
    T_X: float
    iterations_full: int
    iterations_coreset: int

    @property
    def speedup(self) -> float:
        return self.T_X / self.T_S if self.T_S > 0 else math.inf

    @property
    def cost_ratio(self) -> float:
        return self.cost_prime / self.cost if self.cost > 0 else math.inf

    def to_json(self):
        d = asdict(self)
        d["speedup"] = self.speedup
        d["cost_ratio"] = self.cost_ratio
        return d


def _solve(solver, D: Dataset, k, z, m, seed, pool, max_iters):
    if solver == "LL":
        init = robust_seed(D, k, m, 2, seed)
        return lloyd_with_outliers(D, init, k, m, max_iters=max_iters)
    return local_search_robust_median(D, pool, k, m, z, max_iters=max_iters)


def speedup_benchmark(X: Dataset, k: int, z, m, N: int, solver: str = "LL", seed=0,
                      pool_size: int = 100, max_iters: int = 100, **opts) -> SpeedupReport:
    """Solve on the full data and on a coreset; report costs on X and the timings.

    LL (robust Lloyd) needs z = 2. LS (local search) uses a candidate pool of
    ``pool_size`` points sampled from X, shared by both runs.
    """
    solver = solver.upper()
    if solver not in ("LL", "LS"):
        raise InputError(f"solver must be LL or LS, got {solver!r}")
    if solver == "LL" and z != 2:
        raise InputError("LL needs z = 2")
    pool = candidate_pool(X, pool_size, derive_seed(seed, 3)) if solver == "LS" else None

    t0 = time.perf_counter()
    S, _ = build_coreset(X, k, z, m, N, derive_seed(seed, 0), **opts)
    T_C = time.perf_counter() - t0
    S_data = S.as_dataset()

    t0 = time.perf_counter()
    on_coreset = _solve(solver, S_data, k, z, m, derive_seed(seed, 1), pool, max_iters)
    T_S = time.perf_counter() - t0

    t0 = time.perf_counter()
    on_full = _solve(solver, X, k, z, m, derive_seed(seed, 1), pool, max_iters)
    T_X = time.perf_counter() - t0

    return SpeedupReport(
        solver=solver, n=len(X), k=k, z=float(z), m=float(m), N=int(N),
        cost=robust_cost(X, on_full.centers, z, m).cost,
        cost_prime=robust_cost(X, on_coreset.centers, z, m).cost,
        T_C=T_C, T_S=T_S, T_X=T_X,
        iterations_full=on_full.iterations, iterations_coreset=on_coreset.iterations,
    )


def suggest_outlier_count(X: Dataset, k: int, seed=0, top_fraction: float = 0.1):
    """Outlier count at the sharpest break of the sorted distance curve.

    Runs plain Lloyd (no outliers) from k weight-proportional random points,
    sorts distances to the found centers decreasingly and returns the rank
    after the largest consecutive ratio ``d[i] / d[i+1]`` among the top
    ``top_fraction`` ranks. Also returns the curve as (rescaled rank,
    distance, distance / max distance) rows.
    """
    if k < 1:
        raise InputError("k must be >= 1")
    n = len(X)
    if n == 0:
        raise InputError("empty dataset")
    rng = np.random.default_rng(seed)
    p = X.weights / X.total_weight
    init = X.points[rng.choice(n, size=min(k, n), replace=False, p=p)]
    fit = lloyd_with_outliers(X, init, m=0)
    _, sq = _accel.nearest_center(X.points, fit.centers)
    d = np.sort(np.sqrt(sq))[::-1]
    top = d[0] if n else 0.0
    rank = np.arange(n) / max(n - 1, 1)
    curve = np.column_stack([rank, d, d / top if top > 0 else np.zeros(n)])
    span = min(max(1, int(math.ceil(top_fraction * n))), n - 1)
    if span < 1 or top == 0:
        return 0, curve
    head, nxt = d[:span], d[1:span + 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(nxt > 0, head / nxt, np.where(head > 0, np.inf, 1.0))
    i = int(np.argmax(ratio))
    if not ratio[i] > 1.0:
        return 0, curve
    return i + 1, curve
