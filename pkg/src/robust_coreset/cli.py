"""Command line interface.

Every subcommand reads a dataset (a CSV file or ``--synth`` spec), writes its
results into ``--out`` (default ``$ROBUST_CORESET_OUT`` or ``./out``) and
stamps each file with the run configuration and package version.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import _accel, io
from .approx import find_outliers, tri_criteria_approx
from .core import Dataset, InputError, robust_cost
from .coreset import build_coreset
from .decompose import decompose
from .data import SynthSpec, load_csv, synth, write_csv
from .evaluation import (
    METHODS,
    derive_seed,
    make_coreset,
    max_empirical_error,
    max_error_by_level,
    outlier_error_sweep,
    outlier_levels,
    random_center_sets,
    size_error_sweep,
    speedup_benchmark,
    suggest_outlier_count,
)
from .solvers import candidate_pool, lloyd_with_outliers, local_search_robust_median, robust_seed

log = logging.getLogger("robust_coreset")

OUT_ENV = "ROBUST_CORESET_OUT"
Z_PRESETS = {"median": 1.0, "means": 2.0}


@dataclass
class RunConfig:
    command: str
    data: str | None = None
    synth: dict | None = None
    columns: list | None = None
    subsample: int | None = None
    data_seed: int = 0
    standardize: bool = False
    k: int = 5
    z: float = 1.0
    m: int | str = 0
    seed: int = 0
    out: str = "out"
    options: dict = field(default_factory=dict)

    def to_json(self):
        return asdict(self)


def _parse_z(text: str) -> float:
    z = Z_PRESETS.get(text.lower()) if isinstance(text, str) else None
    z = float(text) if z is None else z
    if not z >= 1:
        raise argparse.ArgumentTypeError(f"z must be >= 1 (or median/means), got {text}")
    return z


def _parse_m(text: str):
    if text == "auto":
        return "auto"
    try:
        m = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"m must be a nonnegative integer or 'auto', got {text!r}") from None
    if m < 0:
        raise argparse.ArgumentTypeError("m must be nonnegative")
    return m


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _common(p: argparse.ArgumentParser, needs_m=True):
    p.add_argument("data", nargs="?", help="input CSV with a header row")
    p.add_argument("--synth", help="synthetic data spec, e.g. 'k=5,n=4000,d=5,m=200,seed=1'")
    p.add_argument("--columns", help="comma-separated column names or indices (default: all)")
    p.add_argument("--subsample", type=_positive_int, help="uniformly subsample this many rows")
    p.add_argument("--data-seed", type=int, default=0, help="seed for --subsample")
    p.add_argument("--standardize", action="store_true", help="z-score every selected column")
    p.add_argument("--k", type=_positive_int, default=5)
    p.add_argument("--z", type=_parse_z, default=1.0, help="cost exponent, or median (1) / means (2)")
    if needs_m:
        p.add_argument("--m", type=_parse_m, default=0, help="number of outliers, or 'auto'")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=os.environ.get(OUT_ENV, "out"), help="output directory")
    p.add_argument("--threads", type=_positive_int, help="cap on worker threads")


def _builder_opts(p):
    p.add_argument("--beta", type=float, default=2.0, help="center-count factor of the seed solution")
    p.add_argument("--gamma", type=float, default=2.0, help="outlier factor of the seed solution")
    p.add_argument("--ct", type=float, default=1.0, help="threshold constant: t = ct / (N - m)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robust-coreset", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coreset", help="build a robust coreset")
    _common(p)
    _builder_opts(p)
    p.add_argument("--n", type=_positive_int, required=True, dest="size", help="target coreset size N")
    p.add_argument("--method", choices=METHODS, default="OURS")
    p.add_argument("--dump-decomposition", action="store_true")

    p = sub.add_parser("eval", help="empirical error of a coreset over random center sets")
    _common(p)
    _builder_opts(p)
    p.add_argument("--coreset", help="coreset CSV to evaluate (default: build one)")
    p.add_argument("--n", type=_positive_int, dest="size", help="target size when building")
    p.add_argument("--method", choices=METHODS, default="OURS")
    p.add_argument("--centers", type=_positive_int, default=500, help="number of random center sets")

    p = sub.add_parser("sweep-size", help="error versus coreset size")
    _common(p)
    _builder_opts(p)
    p.add_argument("--sizes", type=_int_list, help="target sizes N (default m+300..m+4800 step 500)")
    p.add_argument("--reps", type=_positive_int, default=1)
    p.add_argument("--methods", default=",".join(METHODS))
    p.add_argument("--centers", type=_positive_int, default=500)

    p = sub.add_parser("sweep-m", help="error versus number of outliers at fixed N - m")
    _common(p, needs_m=False)
    _builder_opts(p)
    p.add_argument("--m-values", type=_int_list, required=True)
    p.add_argument("--extra", type=_positive_int, default=800, help="N - m")
    p.add_argument("--reps", type=_positive_int, default=1)
    p.add_argument("--methods", default=",".join(METHODS))
    p.add_argument("--centers", type=_positive_int, default=500)

    p = sub.add_parser("solve", help="run LL or LS, optionally on a coreset")
    _common(p)
    _builder_opts(p)
    p.add_argument("--solver", choices=("LL", "LS"), default="LL")
    p.add_argument("--n", type=_positive_int, dest="size", help="solve on a coreset of this size")
    p.add_argument("--pool", type=_positive_int, default=100, help="LS candidate pool size")
    p.add_argument("--max-iters", type=_positive_int, default=100)

    p = sub.add_parser("bench-speedup", help="solver time and cost with and without a coreset")
    _common(p)
    _builder_opts(p)
    p.add_argument("--solver", choices=("LL", "LS"), default="LL")
    p.add_argument("--n", type=_positive_int, dest="size", help="coreset size (default m + 500)")
    p.add_argument("--pool", type=_positive_int, default=100)
    p.add_argument("--max-iters", type=_positive_int, default=100)

    p = sub.add_parser("suggest-m", help="pick m at the break of the sorted distance curve")
    _common(p, needs_m=False)

    p = sub.add_parser("synth", help="write a synthetic dataset to CSV")
    p.add_argument("spec", help="synthetic data spec, e.g. 'k=5,n=4000,d=5,m=200,seed=1'")
    p.add_argument("--out", default=os.environ.get(OUT_ENV, "out"))
    return parser


def _load(args) -> Dataset:
    if args.synth and args.data:
        raise InputError("give either a CSV path or --synth, not both")
    if args.synth:
        X = synth(SynthSpec.parse(args.synth)).dataset
        if args.subsample and args.subsample < len(X):
            rng = np.random.default_rng(args.data_seed)
            X = X.subset(np.sort(rng.choice(len(X), size=args.subsample, replace=False)))
        return X
    if not args.data:
        raise InputError("no input: give a CSV path or --synth")
    cols = args.columns.split(",") if args.columns else None
    return load_csv(args.data, cols, args.subsample, args.data_seed, args.standardize,
                    min_points=args.k)


def _config(args, **options) -> RunConfig:
    return RunConfig(
        command=args.command,
        data=str(args.data) if getattr(args, "data", None) else None,
        synth=asdict(SynthSpec.parse(args.synth)) if getattr(args, "synth", None) else None,
        columns=args.columns.split(",") if getattr(args, "columns", None) else None,
        subsample=getattr(args, "subsample", None),
        data_seed=getattr(args, "data_seed", 0),
        standardize=getattr(args, "standardize", False),
        k=getattr(args, "k", 0),
        z=getattr(args, "z", 1.0),
        m=getattr(args, "m", 0),
        seed=getattr(args, "seed", 0),
        out=str(args.out),
        options=options,
    )


def _resolve_m(args, X, cfg: RunConfig) -> int:
    if args.m == "auto":
        m, _ = suggest_outlier_count(X, args.k, args.seed)
        cfg.options["m_auto"] = m
        log.info("auto-selected m=%d", m)
        return m
    if args.m > len(X):
        raise InputError(f"m={args.m} exceeds dataset size {len(X)}")
    return args.m


def _builder(args) -> dict:
    return {"beta": args.beta, "gamma": args.gamma, "threshold_constant": args.ct}


def _methods(text) -> tuple:
    methods = tuple(m.strip().upper() for m in text.split(",") if m.strip())
    bad = [m for m in methods if m not in METHODS]
    if bad:
        raise InputError(f"unknown methods {bad}; choose from {METHODS}")
    return methods


def cmd_coreset(args, out: Path):
    X = _load(args)
    cfg = _config(args, size=args.size, method=args.method, **_builder(args))
    m = _resolve_m(args, X, cfg)
    if args.method == "OURS":
        S, report = build_coreset(X, args.k, args.z, m, args.size, args.seed, **_builder(args))
        payload = {"report": report.to_json()}
        if args.dump_decomposition:
            # rebuild the decomposition exactly as the builder saw it
            approx = tri_criteria_approx(X, args.k, args.z, m, args.beta, args.gamma,
                                         seed=np.random.SeedSequence(args.seed, spawn_key=(0,)))
            out_idx = find_outliers(X, approx.centers, m).full_index(X.weights)
            keep = np.setdiff1d(np.arange(len(X)), out_idx)
            dec = decompose(X.subset(keep), approx.centers, args.z, report.threshold)
            io.write_json(out / "decomposition.json", {"decomposition": dec.to_json(X.ids[keep])},
                          cfg.to_json())
    else:
        S = make_coreset(args.method, X, args.k, args.z, m, args.size, args.seed)
        payload = {"report": {"method": args.method, "actual_size": len(S),
                              "total_weight": S.total_weight}}
    io.write_coreset_csv(out / "coreset.csv", S, cfg.to_json())
    io.write_json(out / "build_report.json", payload, cfg.to_json())
    print(f"wrote {len(S)} points to {out / 'coreset.csv'}")


def cmd_eval(args, out: Path):
    X = _load(args)
    cfg = _config(args, size=args.size, method=args.method, coreset=args.coreset,
                  centers=args.centers, **_builder(args))
    m = _resolve_m(args, X, cfg)
    if args.coreset:
        S = io.read_coreset_csv(args.coreset)
    else:
        if args.size is None:
            raise InputError("eval needs --coreset or --n")
        S = make_coreset(args.method, X, args.k, args.z, m, args.size, args.seed,
                         **(_builder(args) if args.method == "OURS" else {}))
    centers = random_center_sets(X, args.k, args.centers, derive_seed(args.seed, 7))
    eps, samples = max_empirical_error(X, S, centers, args.z, m)
    levels = outlier_levels(m)
    rows = [{"center_set_id": s.center_set_id,
             **{label: s.errors[t] for label, t in zip(("error_t0", "error_t_half", "error_t_m"), levels)}}
            for s in samples]
    io.write_rows_csv(out / "errors.csv", rows, cfg.to_json())
    io.write_json(out / "eval.json", {"eps_hat": eps, "coreset_size": len(S),
                                      "max_error_by_t": max_error_by_level(samples, levels),
                                      "center_distribution": "uniform in bounding box"},
                  cfg.to_json())
    print(f"eps_hat = {eps:.6g}")


def cmd_sweep_size(args, out: Path):
    X = _load(args)
    cfg = _config(args, sizes=args.sizes, reps=args.reps, methods=args.methods,
                  centers=args.centers, **_builder(args))
    m = _resolve_m(args, X, cfg)
    sizes = args.sizes or list(range(m + 300, m + 4801, 500))
    cfg.options["sizes"] = sizes
    tables = size_error_sweep(X, args.k, args.z, m, sizes, args.reps, args.seed,
                              _methods(args.methods), args.centers, **_builder(args))
    rows = io.sweep_rows(tables)
    io.write_rows_csv(out / "sweep_size.csv", rows, cfg.to_json())
    io.write_json(out / "sweep_size.json", {"rows": rows}, cfg.to_json())
    print(f"wrote {len(rows)} rows to {out / 'sweep_size.csv'}")


def cmd_sweep_m(args, out: Path):
    X = _load(args)
    cfg = _config(args, m_values=args.m_values, extra=args.extra, reps=args.reps,
                  methods=args.methods, centers=args.centers, **_builder(args))
    if max(args.m_values) + args.extra > len(X):
        raise InputError("largest m + extra exceeds the dataset size")
    tables = outlier_error_sweep(X, args.k, args.z, args.m_values, args.extra, args.reps, args.seed,
                                 _methods(args.methods), args.centers, **_builder(args))
    rows = io.sweep_rows(tables)
    io.write_rows_csv(out / "sweep_m.csv", rows, cfg.to_json())
    io.write_json(out / "sweep_m.json", {"rows": rows}, cfg.to_json())
    print(f"wrote {len(rows)} rows to {out / 'sweep_m.csv'}")


def cmd_solve(args, out: Path):
    X = _load(args)
    cfg = _config(args, solver=args.solver, size=args.size, pool=args.pool,
                  max_iters=args.max_iters, **_builder(args))
    m = _resolve_m(args, X, cfg)
    if args.solver == "LL" and args.z != 2:
        raise InputError("LL needs --z 2 (means)")
    target = X
    if args.size:
        S, _ = build_coreset(X, args.k, args.z, m, args.size, derive_seed(args.seed, 0), **_builder(args))
        target = S.as_dataset()
    if args.solver == "LL":
        init = robust_seed(target, args.k, m, 2, derive_seed(args.seed, 1))
        res = lloyd_with_outliers(target, init, args.k, m, max_iters=args.max_iters)
    else:
        pool = candidate_pool(X, args.pool, derive_seed(args.seed, 3))
        res = local_search_robust_median(target, pool, args.k, m, args.z, max_iters=args.max_iters)
    payload = {"result": res.to_json(), "cost_on_full_data": robust_cost(X, res.centers, args.z, m).cost}
    io.write_json(out / "solve.json", payload, cfg.to_json())
    print(f"cost on full data = {payload['cost_on_full_data']:.6g}")


def cmd_bench_speedup(args, out: Path):
    X = _load(args)
    cfg = _config(args, solver=args.solver, size=args.size, pool=args.pool,
                  max_iters=args.max_iters, **_builder(args))
    m = _resolve_m(args, X, cfg)
    size = args.size or m + 500
    report = speedup_benchmark(X, args.k, args.z, m, size, args.solver, args.seed, args.pool,
                               args.max_iters, **_builder(args))
    io.write_json(out / "speedup.json", {"report": report.to_json()}, cfg.to_json())
    print(f"{report.solver}: cost={report.cost:.6g} cost'={report.cost_prime:.6g} "
          f"T_C={report.T_C:.3g}s T_S={report.T_S:.3g}s T_X={report.T_X:.3g}s")


def cmd_suggest_m(args, out: Path):
    X = _load(args)
    cfg = _config(args)
    m, curve = suggest_outlier_count(X, args.k, args.seed)
    rows = [{"rank": float(r), "distance": float(d), "scaled_distance": float(s)} for r, d, s in curve]
    io.write_rows_csv(out / "outlier_curve.csv", rows, cfg.to_json())
    io.write_json(out / "suggest_m.json", {"m": m, "n": len(X)}, cfg.to_json())
    print(m)


def cmd_synth(args, out: Path):
    spec = SynthSpec.parse(args.spec)
    data = synth(spec)
    path = out / "synth.csv"
    write_csv(path, data.dataset)
    print(f"wrote {len(data.dataset)} points to {path}")


COMMANDS = {
    "coreset": cmd_coreset,
    "eval": cmd_eval,
    "sweep-size": cmd_sweep_size,
    "sweep-m": cmd_sweep_m,
    "solve": cmd_solve,
    "bench-speedup": cmd_bench_speedup,
    "suggest-m": cmd_suggest_m,
    "synth": cmd_synth,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    _accel.set_threads(getattr(args, "threads", None))
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        COMMANDS[args.command](args, out)
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
