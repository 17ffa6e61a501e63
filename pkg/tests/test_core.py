import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from robust_coreset.core import (
    Dataset,
    InputError,
    brute_force_robust_cost,
    check_triangle_lemma,
    cost_vanilla,
    nearest_center,
    outlier_mass,
    robust_cost,
    robust_cost_columns,
    robust_cost_from_powers,
    robust_cost_integral,
    robust_costs_multi,
)


def line(xs, w=None):
    return Dataset(np.asarray(xs, dtype=float).reshape(-1, 1), w)


# nearest_center

def test_nearest_center_on_center():
    assert nearest_center([0, 0], [[0, 0], [3, 4]]) == (0, 0.0)


def test_nearest_center_345():
    assert nearest_center([3, 4], [[0, 0]]) == (0, 5.0)


def test_nearest_center_tie_goes_to_smaller_index():
    assert nearest_center([1, 0], [[0, 0], [2, 0]]) == (0, 1.0)
    assert nearest_center([1, 0], [[2, 0], [0, 0]]) == (0, 1.0)


def test_nearest_center_dimension_mismatch():
    with pytest.raises(InputError):
        nearest_center([1, 0], [[0, 0, 0]])


# cost_vanilla

def test_cost_vanilla_examples():
    X = line([0, 10])
    assert cost_vanilla(X, [[0.0]], 1) == 10
    assert cost_vanilla(X, [[0.0]], 2) == 100
    assert cost_vanilla(line([0], [3.0]), [[0.0]], 2.7) == 0


def test_cost_vanilla_empty_dataset():
    assert cost_vanilla(Dataset(np.zeros((0, 2))), [[0.0, 0.0]], 1) == 0.0


def test_cost_vanilla_dimension_mismatch():
    with pytest.raises(InputError):
        cost_vanilla(line([0, 1]), [[0.0, 0.0]], 1)


# robust_cost

def test_robust_cost_drops_furthest():
    assert robust_cost(line([0, 10, 100]), [[0.0]], 1, 1).cost == 10


def test_robust_cost_fractional_boundary():
    res = robust_cost(line([0, 10], [1.0, 2.0]), [[0.0]], 1, 1)
    assert res.cost == 10
    assert res.outlier_mass_removed == 1.0
    assert res.boundary_point == (1, 1.0)


def test_robust_cost_matches_brute_force_small(rng):
    X = Dataset(rng.random((8, 2)))
    C = rng.random((2, 2))
    got = robust_cost(X, C, 2, 3).cost
    want = brute_force_robust_cost(X, C, 2, 3)
    assert math.isclose(got, want, rel_tol=1e-12)


def test_robust_cost_rejects_bad_m():
    X = line([0, 1])
    with pytest.raises(InputError):
        robust_cost(X, [[0.0]], 1, 3)
    with pytest.raises(InputError):
        robust_cost(X, [[0.0]], 1, -1)


def test_robust_cost_rejects_small_z():
    with pytest.raises(InputError):
        robust_cost(line([0, 1]), [[0.0]], 0.5, 0)


def test_tie_removes_larger_id_first():
    X = Dataset(np.array([[1.0], [1.0], [0.0]]), ids=[4, 9, 1])
    res = robust_cost(X, [[0.0]], 1, 1)
    assert list(res.removed) == [0.0, 1.0, 0.0]


def test_robust_cost_is_deterministic(rng):
    X = Dataset(rng.normal(size=(300, 3)), rng.random(300) + 0.1)
    C = rng.normal(size=(4, 3))
    a = robust_cost(X, C, 1.5, 17.3)
    b = robust_cost(X, C, 1.5, 17.3)
    assert a.cost == b.cost and np.array_equal(a.removed, b.removed)


@st.composite
def weighted_instance(draw):
    n = draw(st.integers(1, 30))
    d = draw(st.integers(1, 3))
    seed = draw(st.integers(0, 2**32 - 1))
    r = np.random.default_rng(seed)
    pts = r.normal(size=(n, d)) * 10
    w = r.random(n) * 3 + 0.01
    C = r.normal(size=(draw(st.integers(1, 3)), d)) * 10
    z = draw(st.sampled_from([1.0, 1.5, 2.0, 3.0]))
    frac = draw(st.floats(0, 1))
    return Dataset(pts, w), C, z, frac * float(np.sum(w))


@given(weighted_instance())
def test_removed_mass_is_exactly_m(inst):
    X, C, z, m = inst
    res = robust_cost(X, C, z, m)
    assert abs(res.outlier_mass_removed - m) <= 1e-12 * max(1.0, m)
    assert np.all(res.removed <= X.weights) and np.all(res.removed >= 0)


@given(weighted_instance())
def test_m_zero_is_vanilla(inst):
    X, C, z, _ = inst
    assert robust_cost(X, C, z, 0).cost == cost_vanilla(X, C, z)


@given(weighted_instance(), st.floats(0, 1), st.floats(0, 1))
def test_monotone_in_m(inst, a, b):
    X, C, z, _ = inst
    lo, hi = sorted((a, b))
    W = X.total_weight
    assert robust_cost(X, C, z, hi * W).cost <= robust_cost(X, C, z, lo * W).cost * (1 + 1e-12) + 1e-12


@given(weighted_instance())
def test_integral_identity(inst):
    X, C, z, m = inst
    a = robust_cost(X, C, z, m).cost
    b = robust_cost_integral(X, C, z, m)
    assert math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-9)


@given(weighted_instance())
def test_fast_paths_agree(inst):
    X, C, z, m = inst
    ref = robust_cost(X, C, z, m).cost
    from robust_coreset.core import point_costs
    dz = point_costs(X, C, z)
    assert math.isclose(robust_cost_from_powers(dz, X.weights, m), ref, rel_tol=1e-9, abs_tol=1e-9)
    cols = robust_cost_columns(np.column_stack([dz, dz]), X.weights, m)
    assert np.allclose(cols, ref, rtol=1e-9, atol=1e-9)
    assert math.isclose(robust_costs_multi(dz, X.weights, [m])[0], ref, rel_tol=1e-9, abs_tol=1e-9)


def test_unit_weight_partition_path(rng):
    dz = rng.random(50)
    w = np.ones(50)
    got = robust_cost_from_powers(dz, w, 7, unit_weights=True)
    want = float(np.sort(dz)[:43].sum())
    assert math.isclose(got, want, rel_tol=1e-12)


# brute force oracle

def test_brute_force_examples():
    assert brute_force_robust_cost(line([1, 2, 3]), [[0.0]], 1, 1) == 3
    assert brute_force_robust_cost(line([1, 2, 3]), [[0.0]], 2, 2) == 1


def test_brute_force_refuses_large():
    with pytest.raises(InputError):
        brute_force_robust_cost(line(range(13)), [[0.0]], 1, 1)


def test_brute_force_needs_unit_weights():
    with pytest.raises(InputError):
        brute_force_robust_cost(line([1, 2], [1.0, 2.0]), [[0.0]], 1, 1)


# integral

def test_integral_examples():
    X = line([0, 10, 100])
    assert robust_cost_integral(X, [[0.0]], 1, 1) == 10
    assert robust_cost_integral(X, [[0.0]], 2, 0) == 10100


def test_integral_quadrature_steps_agree(rng):
    X = Dataset(rng.random((20, 2)), rng.random(20) + 0.5)
    C = rng.random((2, 2))
    for z in (1, 2, 3):
        a = robust_cost_integral(X, C, z, 2)
        b = robust_cost_integral(X, C, z, 2, quadrature_steps=7)
        assert math.isclose(a, b, rel_tol=1e-12)


def test_integral_rejects_bad_steps():
    with pytest.raises(InputError):
        robust_cost_integral(line([0, 1]), [[0.0]], 1, 0, quadrature_steps=0)


# triangle lemma

def test_triangle_examples():
    assert check_triangle_lemma(0, 0, 0.3, 2.5) == (True, True)
    assert check_triangle_lemma(1, 1, 0.5, 2) == (True, True)


def test_triangle_random(rng):
    a = rng.random(10**5) * 10
    b = rng.random(10**5) * 10
    delta = rng.uniform(1e-3, 1 - 1e-3, 10**5)
    z = rng.uniform(1, 4, 10**5)
    ok = [check_triangle_lemma(*args) for args in zip(a, b, delta, z)]
    assert all(x and y for x, y in ok)


# Dataset

def test_dataset_validation():
    with pytest.raises(InputError):
        Dataset(np.array([[np.nan, 0.0]]))
    with pytest.raises(InputError):
        Dataset(np.zeros((2, 2)), [1.0, -1.0])
    with pytest.raises(InputError):
        Dataset(np.zeros((2, 2)), [1.0])
    X = Dataset(np.zeros((3, 2)))
    assert X.total_weight == 3 and X.dim == 2
    with pytest.raises(ValueError):
        X.points[0, 0] = 1.0


def test_outlier_mass_tie_and_split():
    removed = outlier_mass(np.array([2.0, 2.0, 1.0]), np.array([1.0, 1.0, 1.0]),
                           np.array([0, 1, 2]), 1.5)
    assert list(removed) == [0.5, 1.0, 0.0]
