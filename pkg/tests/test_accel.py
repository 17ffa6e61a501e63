"""numba kernels against their numpy twins."""
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from robust_coreset import _accel

needs_numba = pytest.mark.skipif(not _accel.HAVE_NUMBA, reason="numba not installed")


@needs_numba
@pytest.mark.parametrize("n,d,k", [(1, 1, 1), (17, 3, 4), (2000, 5, 10), (500, 68, 3)])
def test_nearest_center_bit_identical(n, d, k):
    r = np.random.default_rng(n * 31 + d)
    X = r.normal(size=(n, d)) * 100
    C = r.normal(size=(k, d)) * 100
    la, sa = _accel.nearest_center_np(X, C)
    lb, sb = _accel.nearest_center_nb(X, C)
    assert np.array_equal(la, lb)
    assert np.array_equal(sa, sb)


@needs_numba
def test_nearest_center_ties_match():
    X = np.array([[1.0, 0.0], [0.0, 0.0]])
    C = np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 0.0]])
    for f in (_accel.nearest_center_np, _accel.nearest_center_nb):
        labels, _ = f(X, C)
        assert list(labels) == [0, 0]


@needs_numba
def test_min_update_bit_identical():
    r = np.random.default_rng(3)
    X = r.normal(size=(999, 4))
    c = r.normal(size=4)
    cur = r.random(999) * 5
    a = _accel.min_update_np(X, c, cur.copy())
    b = _accel.min_update_nb(X, c, cur.copy())
    assert np.array_equal(a, b)


@needs_numba
def test_weighted_sums_agree():
    r = np.random.default_rng(4)
    X = r.normal(size=(800, 3))
    labels = r.integers(0, 5, 800)
    w = r.random(800)
    sa, ma = _accel.weighted_sums_np(X, labels, w, 6)
    sb, mb = _accel.weighted_sums_nb(X, labels, w, 6)
    # bincount and the loop both add in index order
    assert np.allclose(sa, sb, rtol=1e-13, atol=1e-13)
    assert np.allclose(ma, mb, rtol=1e-13, atol=1e-13)
    assert ma[5] == 0 and np.all(sa[5] == 0)


SCRIPT = """
import json, numpy as np
from robust_coreset import _accel, build_coreset, synth, SynthSpec
X = synth(SynthSpec(clusters=3, points_per_cluster=400, dim=3, outliers=20, seed=5)).dataset
S, _ = build_coreset(X, 3, 2, 20, 150, seed=9)
print(json.dumps({"backend": _accel.backend(), "ids": S.ids.tolist(),
                  "w": [float(v).hex() for v in S.weights]}))
"""


def _run(disable):
    env = dict(os.environ)
    env[_accel.ENV_FLAG] = "1" if disable else "0"
    out = subprocess.run([sys.executable, "-c", SCRIPT], env=env, capture_output=True,
                         text=True, check=True)
    return json.loads(out.stdout)


@needs_numba
def test_env_flag_switches_backend_and_output_matches():
    a = _run(disable=False)
    b = _run(disable=True)
    assert a["backend"] == "numba" and b["backend"] == "numpy"
    assert a["ids"] == b["ids"]
    assert a["w"] == b["w"]
