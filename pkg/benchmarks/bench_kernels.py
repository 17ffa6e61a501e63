"""Time the numba kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--n 200000] [--d 5] [--k 10] [--repeat 5]

Each kernel runs once untimed (numba compile or cache load), then ``--repeat``
times; the best wall time is reported. Outputs of both paths are compared
before timing.
"""
import argparse
import time

import numpy as np

from robust_coreset import _accel


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200_000)
    ap.add_argument("--d", type=int, default=5)
    ap.add_argument("--k", type=int, default=10)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--threads", type=int)
    args = ap.parse_args()
    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")
    _accel.set_threads(args.threads)

    rng = np.random.default_rng(0)
    X = rng.normal(size=(args.n, args.d))
    C = rng.normal(size=(args.k, args.d))
    labels = rng.integers(0, args.k, args.n)
    w = rng.random(args.n)
    cur = np.full(args.n, np.inf)

    la, sa = _accel.nearest_center_np(X, C)
    lb, sb = _accel.nearest_center_nb(X, C)
    assert np.array_equal(la, lb) and np.array_equal(sa, sb), "nearest_center paths disagree"

    cases = {
        "nearest_center": (lambda: _accel.nearest_center_np(X, C),
                           lambda: _accel.nearest_center_nb(X, C)),
        "min_update": (lambda: _accel.min_update_np(X, C[0], cur.copy()),
                       lambda: _accel.min_update_nb(X, C[0], cur.copy())),
        "weighted_sums": (lambda: _accel.weighted_sums_np(X, labels, w, args.k),
                          lambda: _accel.weighted_sums_nb(X, labels, w, args.k)),
    }
    print(f"n={args.n} d={args.d} k={args.k} threads={_accel.numba.get_num_threads()}")
    print(f"{'kernel':<16}{'numpy [ms]':>12}{'numba [ms]':>12}{'ratio':>8}")
    for name, (np_fn, nb_fn) in cases.items():
        a = best_of(np_fn, args.repeat)
        b = best_of(nb_fn, args.repeat)
        print(f"{name:<16}{a * 1e3:>12.2f}{b * 1e3:>12.2f}{a / b:>8.1f}")


if __name__ == "__main__":
    main()
