import math

import numpy as np
import pytest

from robust_coreset import SynthSpec, synth
from robust_coreset.core import Dataset, InputError, robust_cost
from robust_coreset.coreset import SAMPLED, WeightedCoreset
from robust_coreset.evaluation import (
    SpeedupReport,
    derive_seed,
    make_coreset,
    max_empirical_error,
    outlier_error_sweep,
    outlier_levels,
    random_center_sets,
    size_error_sweep,
    speedup_benchmark,
    suggest_outlier_count,
)


@pytest.fixture(scope="module")
def data():
    return synth(SynthSpec(clusters=3, points_per_cluster=700, dim=3, outliers=60, seed=2)).dataset


def identity(X):
    return WeightedCoreset(X.ids, X.points, X.weights, np.full(len(X), SAMPLED, dtype=object))


def test_center_sets_in_box(data):
    one = random_center_sets(data, 1, 1, seed=0)
    assert one.shape == (1, 1, 3)
    C = random_center_sets(data, 4, 200, seed=5)
    lo, hi = data.points.min(axis=0), data.points.max(axis=0)
    assert np.all((C >= lo) & (C <= hi))
    assert np.array_equal(C, random_center_sets(data, 4, 200, seed=5))
    with pytest.raises(InputError):
        random_center_sets(data, 0, 3)


def test_identity_coreset_has_zero_error(data):
    C = random_center_sets(data, 3, 50, seed=1)
    eps, samples = max_empirical_error(data, identity(data), C, 2, 60)
    assert eps == 0
    assert all(e == 0 for s in samples for e in s.errors.values())


def test_missing_far_point_is_detected():
    X = Dataset(np.array([[0.0], [1.0], [2.0], [10.0]]))
    S = identity(X.subset([0, 1, 2]))
    eps, _ = max_empirical_error(X, S, np.array([[[50.0]]]), 1, 0)
    want = abs(robust_cost(X, [[50.0]], 1, 0).cost - robust_cost(X.subset([0, 1, 2]), [[50.0]], 1, 0).cost)
    want /= robust_cost(X, [[50.0]], 1, 0).cost
    assert eps > 0 and math.isclose(eps, want, rel_tol=1e-12)


def test_zero_cost_center_sets_are_skipped():
    X = Dataset(np.array([[1.0], [1.0]]))
    eps, samples = max_empirical_error(X, identity(X), np.array([[[1.0]]]), 2, 0)
    assert eps == 0 and samples[0].errors[0] is None


def test_levels():
    assert outlier_levels(200) == (0, 100, 200)
    assert outlier_levels(7) == (0, 4, 7)


def test_ours_beats_us(data):
    tables = size_error_sweep(data, 3, 1, 60, [360], reps=3, seed=1, methods=("OURS", "US"),
                              center_count=100)
    assert tables["OURS"][0].mean_error < tables["US"][0].mean_error


def test_sweep_shapes(data):
    one = size_error_sweep(data, 3, 2, 60, [400], reps=1, seed=0, center_count=20)
    assert set(one) == {"OURS", "US", "OAUS", "SS"}
    assert all(len(rows) == 1 for rows in one.values())
    many = size_error_sweep(data, 3, 2, 60, [900, 400, 650], reps=2, seed=0, methods=("OURS",),
                            center_count=20)
    assert [r.value for r in many["OURS"]] == [400, 650, 900]
    assert all(r.repetitions == 2 for r in many["OURS"])
    assert set(many["OURS"][0].mean_error_by_t) == {"t0", "t_half", "t_m"}


def test_outlier_sweep(data):
    one = outlier_error_sweep(data, 3, 2, [30], 200, reps=1, seed=0, methods=("OURS",), center_count=20)
    assert len(one["OURS"]) == 1 and one["OURS"][0].value == 30
    zero = outlier_error_sweep(data, 3, 2, [0], 200, reps=1, seed=0, methods=("OURS",), center_count=20)
    assert zero["OURS"][0].mean_error_by_t["t0"] == zero["OURS"][0].mean_error


def test_sweeps_reproducible(data):
    a = size_error_sweep(data, 3, 1, 60, [300], reps=2, seed=4, center_count=20)
    b = size_error_sweep(data, 3, 1, 60, [300], reps=2, seed=4, center_count=20)
    assert {k: [r.to_json() for r in v] for k, v in a.items()} == \
           {k: [r.to_json() for r in v] for k, v in b.items()}


def test_ours_error_trend_in_n():
    X = synth(SynthSpec(clusters=5, points_per_cluster=1000, dim=5, outliers=100, seed=6)).dataset
    sizes = [100 + 300 + 500 * i for i in range(4)]
    rows = size_error_sweep(X, 5, 1, 100, sizes, reps=5, seed=3, methods=("OURS",),
                            center_count=100)["OURS"]
    errs = [r.mean_error for r in rows]
    inversions = [(a, b) for a, b in zip(errs, errs[1:]) if b > a]
    assert len(inversions) <= 1
    assert all(b <= 1.1 * a for a, b in inversions)


def test_make_coreset_unknown(data):
    with pytest.raises(InputError):
        make_coreset("XX", data, 3, 2, 0, 10, 0)


def test_derive_seed():
    assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
    assert derive_seed(1, 2, 3) != derive_seed(1, 3, 2)


def test_suggest_planted():
    for seed in range(5):
        r = np.random.default_rng(seed)
        inl = r.uniform(-1, 1, size=(2000, 2))
        inl /= np.maximum(1, np.linalg.norm(inl, axis=1))[:, None]
        far = r.normal(size=(17, 2))
        far = far / np.linalg.norm(far, axis=1)[:, None] * 1e6
        X = Dataset(np.vstack([inl, far]))
        m, curve = suggest_outlier_count(X, 3, seed)
        assert m == 17
        assert np.all(np.diff(curve[:, 1]) <= 0)
        assert curve[0, 0] == 0 and curve[-1, 0] == 1


def test_suggest_null_ball():
    for seed in range(5):
        r = np.random.default_rng(100 + seed)
        g = r.normal(size=(3000, 3))
        g = g / np.linalg.norm(g, axis=1)[:, None] * r.random(3000)[:, None] ** (1 / 3)
        m, _ = suggest_outlier_count(Dataset(g), 1, seed)
        assert m <= 30


def test_suggest_constant():
    m, curve = suggest_outlier_count(Dataset(np.ones((20, 2))), 2)
    assert m == 0


def test_speedup_report_fields():
    X = synth(SynthSpec(clusters=3, points_per_cluster=800, dim=3, outliers=20, seed=1)).dataset
    for solver, z in (("LL", 2), ("LS", 1)):
        rep = speedup_benchmark(X, 3, z, 20, 220, solver, seed=0, pool_size=30)
        assert isinstance(rep, SpeedupReport)
        doc = rep.to_json()
        for key in ("cost", "cost_prime", "T_C", "T_S", "T_X", "speedup", "cost_ratio"):
            assert key in doc
        assert rep.cost_ratio < 1.5
    with pytest.raises(InputError):
        speedup_benchmark(X, 3, 1, 20, 220, "LL")
    with pytest.raises(InputError):
        speedup_benchmark(X, 3, 1, 20, 220, "XX")
