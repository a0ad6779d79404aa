"""Batch experiment front-end: generate data, run algorithms, check
equivalences, and sweep parameter grids into long-format CSV."""

from __future__ import annotations

import argparse
import itertools
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import algorithms as alg
from .core import Dataset, margin, normalized_margin, read_dataset, write_dataset
from .datagen import GenMode, GenSpec, generate
from .dynamics import run_dynamics
from .errors import NrpError

TRACE_HEADER = ("t,alpha,margin_avg,normalized_margin,l1_delta_p,"
                "regret_w_running,regret_p_running,gap_bound")
SUMMARY_HEADER = ("algo,n,d,gamma,T,final_margin,final_normalized_margin,"
                  "Rw,Rp,wallclock_ms")
ALGOS = ("smooth", "ji", "nag", "mpfp", "pnorm", "vanilla", "dynamics")


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    return format(float(x), ".17g")


def _mode(text: str) -> GenMode:
    return {"lower": GenMode.LOWER_BOUND, "exact": GenMode.EXACT_MARGIN,
            "infeasible": GenMode.INFEASIBLE}[text]


def _add_gen_flags(sp, with_out=True):
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--gamma", type=float, default=0.3)
    sp.add_argument("--p", type=float, default=2.0, help="row-norm exponent")
    sp.add_argument("--mode", choices=("lower", "exact", "infeasible"),
                    default="exact")
    sp.add_argument("--seed", type=int, default=0)
    if with_out:
        sp.add_argument("--out", required=True)


def _gen_dataset(args) -> Dataset:
    if getattr(args, "data", None):
        return read_dataset(args.data)
    if not (0.0 < args.gamma < 1.0) and args.mode != "infeasible":
        raise NrpError(f"--gamma {args.gamma} outside (0, 1)")
    spec = GenSpec(n=args.n, d=args.d, gamma=args.gamma,
                   norm_exponent=args.p, mode=_mode(args.mode), seed=args.seed)
    return generate(spec)


def auto_horizon(algo: str, dataset: Dataset, p_exp: float) -> int:
    """Theory horizons at which each method is guaranteed a clean margin."""
    gamma = dataset.known_margin
    if gamma is None:
        raise NrpError("--T auto needs known_margin metadata")
    logn = math.log(dataset.n)
    if algo == "pnorm":
        return int(math.ceil(math.sqrt(2.0 * (p_exp - 1.0) * logn) / gamma)) + 1
    if algo == "vanilla":
        return int(math.ceil(1.0 / gamma ** 2))
    return int(math.ceil(4.0 * math.sqrt(logn) / gamma))


def _run_one(algo: str, dataset: Dataset, horizon: int, p_exp: float):
    """Run one algorithm; returns (trace_or_None, final_vector, rw, rp)."""
    if algo == "vanilla":
        w, updates, _ = alg.vanilla_perceptron(dataset, horizon)
        return None, w, float("nan"), float("nan")
    if algo in ("smooth", "ji", "dynamics"):
        config = alg.smooth_config(horizon)
    elif algo == "nag":
        config = alg.nag_config(horizon)
    elif algo == "mpfp":
        config = alg.mpfp_config(dataset.n, horizon)
    elif algo == "pnorm":
        config = alg.pnorm_config(dataset.n, horizon, p_exp)
    else:
        raise NrpError(f"unknown algorithm {algo}")
    trace = run_dynamics(config, dataset)
    if algo in ("ji", "nag"):
        final = 0.25 * trace.w_sum     # the original forms output this sum
    else:
        final = trace.w_bar
    return trace, final, trace.regret_w, trace.regret_p


def _trace_rows(trace) -> list[str]:
    rows = []
    for t in range(trace.horizon):
        rows.append(",".join([
            str(t + 1), _fmt(trace.alphas[t]), _fmt(trace.margin_avg[t]),
            _fmt(trace.normalized_margin[t]), _fmt(trace.l1_delta_p[t]),
            _fmt(trace.regret_w_running[t]), _fmt(trace.regret_p_running[t]),
            _fmt(trace.gap_bound_running[t])]))
    return rows


def cmd_gen(args) -> int:
    dataset = _gen_dataset(args)
    write_dataset(dataset, args.out)
    print(f"wrote {dataset.n}x{dataset.d} dataset to {args.out}")
    return 0


def cmd_run(args) -> int:
    dataset = _gen_dataset(args)
    p_exp = args.p_exp if args.p_exp is not None else dataset.norm_exponent
    if args.T == "auto":
        horizon = auto_horizon(args.algo, dataset, p_exp)
    else:
        horizon = int(args.T)
        if horizon < 1:
            raise NrpError("T must be >= 1")
    t0 = time.perf_counter()
    trace, final, rw, rp = _run_one(args.algo, dataset, horizon, p_exp)
    ms = (time.perf_counter() - t0) * 1000.0

    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, f"trace_{args.algo}.csv")
        with open(path, "w") as fh:
            fh.write(TRACE_HEADER + "\n")
            if trace is not None:
                fh.write("\n".join(_trace_rows(trace)) + "\n")
    fm = margin(dataset, final)
    fnm = (normalized_margin(dataset, final)
           if float(np.linalg.norm(final)) > 0 else float("nan"))
    gamma = dataset.known_margin
    print(SUMMARY_HEADER)
    print(",".join([args.algo, str(dataset.n), str(dataset.d), _fmt(gamma),
                    str(horizon), _fmt(fm), _fmt(fnm), _fmt(rw), _fmt(rp),
                    _fmt(ms)]))
    return 0


def cmd_equiv(args) -> int:
    dataset = _gen_dataset(args)
    which = alg.EquivalencePair(args.which)
    report = alg.check_equivalence(which, dataset, int(args.T), tol=args.tol,
                                   perturb=args.perturb)
    for name, dev in report.deviations.items():
        print(f"{name}: {dev:.3e}")
    print(f"{'PASS' if report.passed else 'FAIL'} "
          f"(max deviation {report.max_deviation:.3e}, tol {report.tol:g})")
    return 0 if report.passed else 1


def cmd_sweep(args) -> int:
    grid = list(itertools.product(args.algos, args.n, args.gamma, args.p,
                                  args.seed, args.T))
    header = ("algo,n,d,gamma,p,seed,T,final_margin,final_normalized_margin,"
              "Rw,Rp,wallclock_ms")

    def cell(item):
        algo, n, gamma, p, seed, horizon = item
        mode = args.mode if p == 2.0 or args.mode == "lower" else "lower"
        spec = GenSpec(n=n, d=args.d, gamma=gamma, norm_exponent=p,
                       mode=_mode(mode), seed=seed)
        dataset = generate(spec)
        t0 = time.perf_counter()
        _, final, rw, rp = _run_one(algo, dataset, horizon, p)
        ms = (time.perf_counter() - t0) * 1000.0
        fm = margin(dataset, final)
        fnm = (normalized_margin(dataset, final)
               if float(np.linalg.norm(final)) > 0 else float("nan"))
        return ",".join([algo, str(n), str(args.d), _fmt(gamma), _fmt(p),
                         str(seed), str(horizon), _fmt(fm), _fmt(fnm),
                         _fmt(rw), _fmt(rp), _fmt(ms)])

    workers = int(os.environ.get("NRP_THREADS", os.cpu_count() or 1))
    if grid:
        with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
            rows = list(pool.map(cell, grid))   # ordered by grid index
    else:
        rows = []
    with open(args.out, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(row + "\n")
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nrp",
        description="accelerated Perceptrons as two-player no-regret dynamics")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("gen", help="generate a synthetic dataset file")
    _add_gen_flags(sp)
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("run", help="run one algorithm, emit trace + summary")
    sp.add_argument("--algo", choices=ALGOS, required=True)
    sp.add_argument("--data", help="dataset file (overrides gen flags)")
    _add_gen_flags(sp, with_out=False)
    sp.add_argument("--T", default="auto", help="horizon, integer or 'auto'")
    sp.add_argument("--p-exp", dest="p_exp", type=float, default=None)
    sp.add_argument("--out", default=None, help="directory for the trace CSV")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("equiv", help="original form vs dynamics form check")
    sp.add_argument("--which", choices=[e.value for e in alg.EquivalencePair],
                    required=True)
    sp.add_argument("--data", help="dataset file (overrides gen flags)")
    _add_gen_flags(sp, with_out=False)
    sp.add_argument("--T", required=True)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--perturb", type=float, default=0.0,
                    help="negative control: scale the p step by 1 + this")
    sp.set_defaults(func=cmd_equiv)

    sp = sub.add_parser("sweep", help="cartesian grid of runs into one CSV")
    sp.add_argument("--algos", nargs="*", default=[], choices=ALGOS)
    sp.add_argument("--n", nargs="*", type=int, default=[])
    sp.add_argument("--d", type=int, default=4)
    sp.add_argument("--gamma", nargs="*", type=float, default=[0.3])
    sp.add_argument("--p", nargs="*", type=float, default=[2.0])
    sp.add_argument("--seed", nargs="*", type=int, default=[0])
    sp.add_argument("--T", nargs="*", type=int, default=[])
    sp.add_argument("--mode", choices=("lower", "exact"), default="exact")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NrpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
