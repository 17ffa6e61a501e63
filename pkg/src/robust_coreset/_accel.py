"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The numba kernels are used when numba imports and the environment variable
``ROBUST_CORESET_DISABLE_NUMBA`` is unset (or ``0``). Both paths accumulate
squared distances coordinate by coordinate in the same order, so they return
bit-identical results.
"""
from __future__ import annotations

import os

import numpy as np

ENV_FLAG = "ROBUST_CORESET_DISABLE_NUMBA"


def _numba_requested() -> bool:
    return os.environ.get(ENV_FLAG, "0").strip().lower() in ("", "0", "false", "no")


try:
    import numba
    from numba import njit, prange

    HAVE_NUMBA = True
    if "NUMBA_THREADING_LAYER" not in os.environ:
        # the system TBB is too old for numba; skip the probe and its warning
        numba.config.THREADING_LAYER = "workqueue"
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _numba_requested()


# ---------------------------------------------------------------------------
# pure numpy
# ---------------------------------------------------------------------------

def sqdist_to_point_np(X, c):
    acc = np.zeros(X.shape[0])
    for j in range(X.shape[1]):
        diff = X[:, j] - c[j]
        acc += diff * diff
    return acc


def nearest_center_np(X, C):
    n = X.shape[0]
    best = np.full(n, np.inf)
    labels = np.zeros(n, dtype=np.int64)
    for i in range(C.shape[0]):
        d = sqdist_to_point_np(X, C[i])
        closer = d < best  # strict: ties keep the smaller index
        best[closer] = d[closer]
        labels[closer] = i
    return labels, best


def min_update_np(X, c, current):
    d = sqdist_to_point_np(X, c)
    np.minimum(current, d, out=current)
    return current


def weighted_sums_np(X, labels, w, k):
    sums = np.empty((k, X.shape[1]))
    for j in range(X.shape[1]):
        sums[:, j] = np.bincount(labels, weights=w * X[:, j], minlength=k)
    mass = np.bincount(labels, weights=w, minlength=k)
    return sums, mass


# ---------------------------------------------------------------------------
# numba
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True, parallel=True)
    def nearest_center_nb(X, C):
        n, d = X.shape
        k = C.shape[0]
        labels = np.zeros(n, dtype=np.int64)
        best = np.empty(n)
        for p in prange(n):
            bd = np.inf
            bi = 0
            for i in range(k):
                acc = 0.0
                for j in range(d):
                    diff = X[p, j] - C[i, j]
                    acc += diff * diff
                if acc < bd:
                    bd = acc
                    bi = i
            best[p] = bd
            labels[p] = bi
        return labels, best

    @njit(cache=True, parallel=True)
    def min_update_nb(X, c, current):
        n, d = X.shape
        for p in prange(n):
            acc = 0.0
            for j in range(d):
                diff = X[p, j] - c[j]
                acc += diff * diff
            if acc < current[p]:
                current[p] = acc
        return current

    @njit(cache=True)
    def weighted_sums_nb(X, labels, w, k):
        n, d = X.shape
        sums = np.zeros((k, d))
        mass = np.zeros(k)
        for p in range(n):
            lab = labels[p]
            mass[lab] += w[p]
            for j in range(d):
                sums[lab, j] += w[p] * X[p, j]
        return sums, mass

else:  # pragma: no cover
    nearest_center_nb = nearest_center_np
    min_update_nb = min_update_np
    weighted_sums_nb = weighted_sums_np


def _as_float(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def nearest_center(X, C):
    """Return ``(labels, squared distances)`` of every row of X to its nearest row of C.

    Ties go to the smallest center index.
    """
    X = _as_float(X)
    C = _as_float(C)
    if USE_NUMBA:
        return nearest_center_nb(X, C)
    return nearest_center_np(X, C)


def min_update(X, c, current):
    """In place ``current = min(current, |X - c|^2)``."""
    if USE_NUMBA:
        return min_update_nb(_as_float(X), _as_float(c), current)
    return min_update_np(X, c, current)


def weighted_sums(X, labels, w, k):
    """Per-label weighted coordinate sums and masses."""
    labels = np.ascontiguousarray(labels, dtype=np.int64)
    w = _as_float(w)
    if USE_NUMBA:
        return weighted_sums_nb(_as_float(X), labels, w, k)
    return weighted_sums_np(X, labels, w, k)


def set_threads(n: int | None) -> None:
    """Cap the worker count of the parallel kernels."""
    if n is None or not USE_NUMBA:
        return
    numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
