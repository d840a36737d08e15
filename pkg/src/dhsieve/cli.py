"""Command line entry point.

Subcommands: simulate (run a recovery algorithm on random instances),
table1 (cancellation-race averages), scaling (fit the race scaling law
from a CSV), verify (statistical verification suite).

A JSON config file may supply any flag (keys use underscores); explicit
flags win.  Exit codes: 0 success, 1 check/recovery failure, 2 usage
error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time

import numpy as np

from .errors import NoHiddenReflectionError
from .group import AbelianGroupSpec, GroupCtx
from .harness import ResultRow, fit_scaling, run_table1, verify_suite
from .oracle import make_reflection_oracle, make_shift_pair
from .recover import (
    recover_slope_general,
    recover_slope_power2,
    recover_slope_radix,
    solve_abelian_shift,
)

TABLE1_FIELDS = ["budget", "trials", "mean", "stddev", "queries", "seconds"]
SIM_FIELDS = ["trial", "secret", "recovered", "success", "queries", "seconds"]


class UsageError(Exception):
    pass


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _rows_csv(dicts, fields):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for d in dicts:
        w.writerow(d)
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, float):
        return round(v, 6)
    return v


def _table1_dicts(rows):
    return [{"budget": r.budget, "trials": r.trials, "mean": _fmt(r.mean),
             "stddev": _fmt(r.stddev), "queries": r.queries,
             "seconds": _fmt(r.seconds)} for r in rows]


def _parse_budgets(text):
    """Accept "3^1..3^6" ranges or comma-separated integers / powers."""
    def one(tok):
        if "^" in tok:
            b, e = tok.split("^")
            return int(b) ** int(e)
        return int(tok)

    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..")
        if "^" not in lo or "^" not in hi:
            raise UsageError("range syntax is base^lo..base^hi")
        base, e0 = lo.split("^")
        base2, e1 = hi.split("^")
        if base != base2:
            raise UsageError("range endpoints must share a base")
        return [int(base) ** e for e in range(int(e0), int(e1) + 1)]
    return [one(t) for t in text.split(",") if t]


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_table1(args):
    budgets = _parse_budgets(args.budgets)
    rows = run_table1(budgets, trials=args.trials, r=args.radix,
                      n_labels=args.labels, seed=args.seed)
    dicts = _table1_dicts(rows)
    if args.format == "json":
        _emit(json.dumps(dicts, indent=2) + "\n", args.out)
    else:
        _emit(_rows_csv(dicts, TABLE1_FIELDS), args.out)
    return 0


def _cmd_scaling(args):
    rows = []
    with open(getattr(args, "in")) as fh:
        for rec in csv.DictReader(fh):
            rows.append(ResultRow(
                budget=int(rec["budget"]), trials=int(rec["trials"]),
                mean=float(rec["mean"]), stddev=float(rec["stddev"]),
                queries=int(rec["queries"]), seconds=float(rec["seconds"])))
    slope, intercept, residuals = fit_scaling(rows)
    payload = {"slope": _fmt(slope), "intercept": _fmt(intercept),
               "residuals": [_fmt(float(r)) for r in residuals]}
    _emit(json.dumps(payload, indent=2) + "\n", args.out)
    return 0


def _cmd_verify(args):
    report = verify_suite(N_max=args.nmax, samples=args.samples,
                          seed=args.seed, coin_bias=args.coin_bias,
                          phase_sign=args.phase_sign)
    _emit(report.format() + "\n", args.out)
    return 0 if report.passed else 1


def _random_secret(rng, N):
    if N.bit_length() <= 62:
        return int(rng.integers(0, N))
    nbytes = (N.bit_length() + 64) // 8
    return int.from_bytes(rng.bytes(nbytes), "little") % N


def _sim_trial(args, rng):
    if args.algorithm == "staged":
        if args.n is None:
            raise UsageError("--n is required for the staged algorithm")
        N = 1 << args.n
        s = _random_secret(rng, N)
        o = make_reflection_oracle(GroupCtx(N), s)
        got, _ = recover_slope_power2(o, args.n, rng=rng)
        return str(s), str(got), o.queries
    if args.algorithm == "general":
        if args.N is None:
            raise UsageError("--N is required for the general algorithm")
        s = _random_secret(rng, args.N)
        o = make_reflection_oracle(GroupCtx(args.N), s)
        got, _ = recover_slope_general(o, args.N, rng=rng)
        return str(s), str(got), o.queries
    if args.algorithm == "greedy":
        if args.n is None:
            raise UsageError("--n is required for the greedy algorithm")
        N = args.radix ** args.n
        s = _random_secret(rng, N)
        o = make_reflection_oracle(GroupCtx(N), s)
        got, _ = recover_slope_radix(o, args.radix, args.n, rng=rng,
                                     budget=args.budget)
        return str(s), str(got), o.queries
    if args.algorithm == "abelian":
        if not args.orders:
            raise UsageError("--orders is required for the abelian algorithm")
        orders = tuple(int(t) for t in args.orders.split(","))
        A = AbelianGroupSpec(orders)
        s = tuple(int(rng.integers(0, n)) for n in orders)
        pair = make_shift_pair(A, s)
        got, _ = solve_abelian_shift(pair, rng=rng)
        fmt = lambda v: ";".join(map(str, v))
        return fmt(s), fmt(got), pair.queries
    raise UsageError(f"unknown algorithm {args.algorithm!r}")


def _cmd_simulate(args):
    rng = np.random.default_rng(args.seed)
    dicts = []
    failures = 0
    for trial in range(args.trials):
        t0 = time.perf_counter()
        try:
            secret, got, queries = _sim_trial(args, rng)
            ok = secret == got
        except NoHiddenReflectionError:
            secret, got, queries, ok = "", "", 0, False
        failures += not ok
        dicts.append({"trial": trial, "secret": secret, "recovered": got,
                      "success": int(ok), "queries": queries,
                      "seconds": _fmt(time.perf_counter() - t0)})
    if args.format == "json":
        _emit(json.dumps(dicts, indent=2) + "\n", args.out)
    else:
        _emit(_rows_csv(dicts, SIM_FIELDS), args.out)
    return 1 if failures else 0


# ---------------------------------------------------------------------------
# Parser


def _add_common(p):
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--config", default=None, help="JSON file of defaults")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dhsieve",
        description="Classical simulator for the dihedral sieve algorithms")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a recovery on random instances")
    p.add_argument("--algorithm", required=True,
                   choices=["staged", "general", "greedy", "abelian"])
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--orders", default=None,
                   help="comma-separated cyclic orders")
    p.add_argument("--radix", type=int, default=2)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--budget", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("table1", help="cancellation race averages")
    p.add_argument("--budgets", default="3^1..3^6")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--radix", type=int, default=2)
    p.add_argument("--labels", type=int, default=96,
                   help="label width in bits")
    _add_common(p)
    p.set_defaults(func=_cmd_table1)

    p = sub.add_parser("scaling", help="fit the race scaling law")
    p.add_argument("--in", required=True, dest="in",
                   help="CSV produced by table1")
    _add_common(p)
    p.set_defaults(func=_cmd_scaling)

    p = sub.add_parser("verify", help="statistical verification suite")
    p.add_argument("--nmax", type=int, default=32)
    p.add_argument("--samples", type=int, default=100000)
    p.add_argument("--coin-bias", type=float, default=0.5,
                   help="fault injection: extraction coin bias")
    p.add_argument("--phase-sign", type=int, default=1,
                   help="fault injection: +1 or -1")
    _add_common(p)
    p.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None):
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    # config files supply defaults; explicit flags override because
    # argparse processes the command line after set_defaults
    if "--config" in argv:
        try:
            path = argv[argv.index("--config") + 1]
        except IndexError:
            parser.error("--config needs a path")
        try:
            with open(path) as fh:
                cfg = json.load(fh)
        except (OSError, ValueError) as exc:
            print(f"bad config file: {exc}", file=sys.stderr)
            return 2
        if not isinstance(cfg, dict):
            print("config must be a JSON object", file=sys.stderr)
            return 2
        for action in parser._subparsers._group_actions:
            for sp in getattr(action, "choices", {}).values():
                sp.set_defaults(**{k: v for k, v in cfg.items()})
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
