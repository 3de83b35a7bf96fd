"""Command-line interface.

Every subcommand writes a CSV whose leading ``#`` comment line carries the
full parameter set as JSON; when writing to a file a ``.json`` sidecar with
the same parameters is written next to it.  Exit status is 0 on success,
1 when the check a subcommand performs fails, 2 on usage errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import streams
from .diffusion import BracoParams, FellerParams
from .exactmarkov import index_config, prototype_duality_sides, wedge_duality_sides
from .experiments import (
    braco_scaling_table,
    feller_scaling_table,
    laplace_duality_report,
    moment_duality_report,
    pure_death_scaling,
)
from .graphical import (
    RateSpec,
    dual_mechanisms,
    forward_mechanisms,
    pathwise_duality_holds,
    sample_event_log,
)
from .mechanisms import classify_all

OUT_DIR_ENV = "IPSDUAL_OUT_DIR"
WEDGE_TOL = 1e-8


class UsageError(Exception):
    pass


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _float_list(text: str) -> list[float]:
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}")


def _rates(text: str) -> RateSpec:
    try:
        return RateSpec.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


class _Output:
    def __init__(self, args, params: dict):
        self.args = args
        self.params = params

    def _target(self):
        out = self.args.out
        if out is None:
            out_dir = os.environ.get(OUT_DIR_ENV)
            if not out_dir:
                return "-"
            ext = "json" if self.args.format == "json" else "csv"
            return os.path.join(out_dir, f"{self.args.command}.{ext}")
        return out

    def write(self, columns: list[str], rows: list[dict]) -> None:
        buf = io.StringIO()
        if self.args.format == "json":
            payload = {"parameters": self.params, "columns": columns,
                       "rows": [{c: r[c] for c in columns} for r in rows]}
            buf.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
        else:
            buf.write("# " + json.dumps(self.params, sort_keys=True) + "\n")
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(columns)
            for r in rows:
                w.writerow([_fmt(r[c]) for c in columns])
        target = self._target()
        if target == "-":
            sys.stdout.write(buf.getvalue())
            return
        os.makedirs(os.path.dirname(os.path.abspath(target)), exist_ok=True)
        with open(target, "w", newline="") as fh:
            fh.write(buf.getvalue())
        if self.args.format == "csv":
            with open(target + ".json", "w") as fh:
                fh.write(json.dumps(self.params, sort_keys=True, indent=2) + "\n")


def _params(args, **extra) -> dict:
    skip = {"out", "format", "func"}
    d = {k: v for k, v in vars(args).items() if k not in skip}
    for k, v in list(d.items()):
        if isinstance(v, RateSpec):
            d[k] = list(v.as_tuple())
    d.update(extra)
    return d


def cmd_classify(args) -> int:
    cat = classify_all()
    rows = cat.rows()
    _Output(args, _params(args, with_dual=cat.with_dual_count,
                          self_dual=cat.self_dual_count)).write(["f", "g", "self_dual"], rows)
    return 0


def cmd_pathwise(args) -> int:
    if args.n < 2:
        raise UsageError("--n must be >= 2")
    if args.reps < 0 or args.horizon < 0:
        raise UsageError("--reps and --horizon must be >= 0")
    fwd, dual = forward_mechanisms(), dual_mechanisms()
    per_pair = args.rates.per_pair(args.n)
    rows = []
    for rep in range(args.reps):
        rng = streams.stream(args.seed, streams.PATHWISE, rep)
        log = sample_event_log(args.n, per_pair, args.horizon, rng)
        x0 = rng.integers(0, 2, args.n)
        y0 = rng.integers(0, 2, args.n)
        ok = pathwise_duality_holds(x0, y0, log, fwd, dual)
        rows.append({"replicate": rep, "seed": args.seed, "events": len(log), "holds": int(ok)})
    _Output(args, _params(args)).write(["replicate", "seed", "events", "holds"], rows)
    held = sum(r["holds"] for r in rows)
    print(f"holds: {held}/{args.reps}", file=sys.stderr)
    return 0 if held == args.reps else 1


def cmd_exact_dual(args) -> int:
    if args.n_max < 1:
        raise UsageError("--n-max must be >= 1")
    if args.n_max > args.cap:
        raise UsageError(f"--n-max exceeds the full-chain cap {args.cap}")
    rows, worst = [], 0.0
    for N in range(1, args.n_max + 1):
        rng = streams.stream(args.seed, streams.EXACT, N)
        for _ in range(args.draws):
            rates = args.rates or RateSpec(*rng.uniform(0.0, 2.0, 4))
            xi = int(rng.integers(1 << N))
            yi = int(rng.integers(1 << N))
            x, y = index_config(xi, N), index_config(yi, N)
            for t in args.t_grid:
                lhs, rhs = wedge_duality_sides(N, rates, x, y, t, max_n=args.cap)
                gap = abs(lhs - rhs)
                worst = max(worst, gap)
                rows.append({
                    "N": N, "x": "".join(map(str, x)), "y": "".join(map(str, y)), "t": t,
                    "u": rates.u, "e": rates.e, "gamma": rates.gamma, "beta": rates.beta,
                    "lhs": lhs, "rhs": rhs, "gap": gap,
                })
    cols = ["N", "x", "y", "t", "u", "e", "gamma", "beta", "lhs", "rhs", "gap"]
    _Output(args, _params(args, tolerance=WEDGE_TOL)).write(cols, rows)
    return 0 if worst <= WEDGE_TOL else 1


def cmd_prototype(args) -> int:
    if not args.N_list or min(args.N_list) < 1:
        raise UsageError("--N-list needs positive sizes")
    if not 0.0 <= args.k_frac <= 1.0:
        raise UsageError("--k-frac must lie in [0, 1]")
    rows = []
    for N in sorted(args.N_list):
        if args.n > N:
            raise UsageError("--n exceeds N")
        k = int(math.floor(args.k_frac * N))
        base = args.rates
        rates = RateSpec(base.u, base.e, args.c * N if args.c is not None else base.gamma, base.beta)
        lhs, rhs = prototype_duality_sides(N, args.n, k, rates, args.t)
        rows.append({"N": N, "n": args.n, "k": k, "t": args.t, "gamma": rates.gamma,
                     "lhs": lhs, "rhs": rhs, "gap": abs(lhs - rhs)})
    _Output(args, _params(args)).write(["N", "n", "k", "t", "gamma", "lhs", "rhs", "gap"], rows)
    gaps = [r["gap"] for r in rows]
    return 0 if all(b <= a for a, b in zip(gaps, gaps[1:])) else 1


def cmd_sde_dual(args) -> int:
    if args.reps < 2 or args.dt <= 0:
        raise UsageError("--reps must be >= 2 and --dt > 0")
    try:
        if args.kind == "moment":
            rep = moment_duality_report(
                BracoParams(args.b, args.c, args.d), args.n, args.y, args.t,
                reps=args.reps, dt=args.dt, seed=args.seed)
        else:
            if args.kind == "feller-closed":
                p, r = FellerParams(0.0, 0.0, args.beta), 1.0
            else:
                p, r = FellerParams(args.alpha, args.gamma, args.beta), args.r
            rep = laplace_duality_report(
                p, r, args.x, args.y, args.t, reps=args.reps, dt=args.dt, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc))
    row = {"kind": args.kind, **rep.row()}
    cols = ["kind", "lhs", "lhs_se", "rhs", "rhs_se", "gap", "bias_allowance", "tolerance", "pass"]
    _Output(args, _params(args)).write(cols, [row])
    return 0 if rep.passed else 1


def cmd_scaling(args) -> int:
    if not args.N_list or min(args.N_list) < 1:
        raise UsageError("--N-list needs positive sizes")
    if args.kind == "braco":
        table = braco_scaling_table(args.N_list, args.n, args.rates.u, args.rates.e,
                                    args.rates.beta, args.c, args.t)
    elif args.kind == "feller":
        table = feller_scaling_table(args.N_list, args.x, args.alpha, args.gamma, args.beta,
                                     args.t, e0=args.e0, reference_reps=args.reps,
                                     dt=args.dt, seed=args.seed)
    else:
        table = pure_death_scaling(args.N_list, args.beta, args.y, args.t_grid)
    rows = [{"N": N, "distance": d} for N, d, _ in table.rows]
    _Output(args, _params(args)).write(["N", "distance"], rows)
    return 0 if table.improved else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ipsdual",
        description="Dual basic mechanisms, pathwise and exact duality checks, "
                    "and scaling limits of two-type particle systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=True):
        p.add_argument("--out", default=None, help="output file, '-' for stdout")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        if seed:
            p.add_argument("--seed", type=int, default=streams.DEFAULT_SEED)

    p = sub.add_parser("classify", help="catalog of all dual basic mechanisms")
    common(p, seed=False)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("pathwise", help="pathwise duality on sampled event logs")
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--rates", type=_rates, default=RateSpec(1, 1, 1, 1),
                   help="u,e,gamma,beta")
    p.add_argument("--horizon", type=float, default=1.0)
    p.add_argument("--reps", type=int, default=1000)
    common(p)
    p.set_defaults(func=cmd_pathwise)

    p = sub.add_parser("exact-dual", help="exact wedge duality on {0,1}^N")
    p.add_argument("--n-max", type=int, default=5)
    p.add_argument("--rates", type=_rates, default=None,
                   help="u,e,gamma,beta; random per draw when omitted")
    p.add_argument("--t-grid", type=_float_list, default=[0.1, 0.5, 1.0, 2.0])
    p.add_argument("--draws", type=int, default=10)
    p.add_argument("--cap", type=int, default=14, help="largest N for the full chain")
    common(p)
    p.set_defaults(func=cmd_exact_dual)

    p = sub.add_parser("prototype", help="finite-N prototype duality gap")
    p.add_argument("--c", type=float, default=1.0, help="gamma = c N")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--k-frac", type=float, default=0.3)
    p.add_argument("--N-list", type=_int_list, default=[50, 100, 200, 400])
    p.add_argument("--rates", type=_rates, default=RateSpec(1, 0.5, 0, 1),
                   help="u,e,gamma,beta; gamma replaced by c N")
    p.add_argument("--t", type=float, default=1.0)
    common(p, seed=False)
    p.set_defaults(func=cmd_prototype)

    p = sub.add_parser("sde-dual", help="Monte Carlo moment / Laplace duality")
    p.add_argument("--kind", choices=("moment", "laplace", "feller-closed"), default="moment")
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--d", type=float, default=0.5)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--x", type=float, default=2.0)
    p.add_argument("--y", type=float, default=0.3)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--reps", type=int, default=100_000)
    common(p)
    p.set_defaults(func=cmd_sde_dual)

    p = sub.add_parser("scaling", help="convergence tables for the scaling limits")
    p.add_argument("--kind", choices=("braco", "feller", "pure-death"), default="braco")
    p.add_argument("--N-list", type=_int_list, default=[50, 100, 200, 400])
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--rates", type=_rates, default=RateSpec(1, 0.5, 0, 0.5),
                   help="u,e,gamma,beta (braco; gamma replaced by c N)")
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--x", type=float, default=1.0)
    p.add_argument("--y", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--e0", type=float, default=0.5)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--t-grid", type=_float_list, default=[0.0, 0.25, 0.5, 0.75, 1.0])
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--reps", type=int, default=200_000, help="reference sample size (feller)")
    common(p)
    p.set_defaults(func=cmd_scaling)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())
