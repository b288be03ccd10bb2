"""Command line front end.

Exit codes: 0 on success, 2 when a validation, trend or band check fails,
1 on usage errors and bad input.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

from . import io
from .combiner import combine
from .errors import LorentzMaxError
from .experiments import EXPERIMENTS, ExperimentConfig, report_csv, report_json, run, write_report
from .generators import (
    CASES,
    build_component,
    gen_first_type,
    gen_first_type_prime,
    gen_second_type,
    gen_second_type_prime,
    synth_second_type,
    synth_second_type_prime,
    thm1_sequences,
)
from .lorentz import AdmissibleTriple, norm_of
from .maximal import maximal_function
from .opnorm import restricted_constant_exact, search_constant, witness_ratio
from .space import validate_space


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _real(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "infinity", "oo"):
        return math.inf
    try:
        return float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _ints(text: str) -> tuple:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _reals(text: str) -> tuple:
    return tuple(_real(x) for x in text.split(",") if x.strip())


def _emit(obj: dict, out) -> None:
    text = json.dumps(obj, indent=1, sort_keys=True)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        print(text)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------
def cmd_validate(args) -> int:
    rep = validate_space(io.load_space(args.space))
    if rep.ok:
        print("ok")
        return 0
    for code, detail in rep.violations:
        print(f"{code}: {detail}")
    return 2


def cmd_gen(args) -> int:
    fam = args.family
    if fam == "first":
        space = gen_first_type(list(args.m))
    elif fam == "first-prime":
        space, plan = gen_first_type_prime(list(args.m))
        space.meta["plan"] = plan
    elif fam == "second":
        space = gen_second_type(synth_second_type(args.p, args.q, args.r, args.l))
    elif fam == "second-prime":
        space = gen_second_type_prime(synth_second_type_prime(args.p, args.q, args.l))
    elif fam == "combined":
        space = combine([io.load_space(path) for path in args.components])
    else:
        recipe = thm1_sequences(args.case, args.p0, args.q0, args.r0, args.n)
        space = build_component(recipe)
    _emit(io.space_to_dict(space), args.out)
    return 0


def cmd_maximal(args) -> int:
    space = io.load_space(args.space)
    Mf = maximal_function(space, io.load_function(args.function)).Mf
    _emit(io.function_to_dict(Mf), args.out)
    return 0


def cmd_norm(args) -> int:
    space = io.load_space(args.space)
    val = norm_of(space, io.load_function(args.function), args.p, args.q)
    print(f"{float(val)!r}\tlog2={val.log2()!r}")
    return 0


def cmd_cnorm(args) -> int:
    space = io.load_space(args.space)
    triple = AdmissibleTriple(args.p, args.q, args.r)
    if args.method == "restricted":
        if args.q != 1:
            raise UsageError("the restricted method needs --q 1")
        est = restricted_constant_exact(space, args.p, args.r, args.subset_budget)
        val, f, how = est.lower, est.witness, f"{est.method} exact={est.exact}"
    elif args.method == "witness":
        if not args.function:
            raise UsageError("the witness method needs --function")
        f = io.load_function(args.function)
        val, how = witness_ratio(space, f, triple), "witness"
    else:
        est = search_constant(space, triple, budget=args.budget, seed=args.seed)
        val, f, how = est.lower, est.witness, est.method
    print(f"{float(val)!r}\tlog2={val.log2()!r}\t{how}")
    if args.out:
        io.save_function(f, args.out)
    return 0


def cmd_experiment(args) -> int:
    kw = dict(experiment=args.name, p0=args.p0, q0=args.q0, r0=args.r0, seed=args.seed, fmt=args.format, out=args.out)
    if args.sweep:
        kw["sweep"] = args.sweep
    if args.r_grid:
        kw["r_grid"] = args.r_grid
    if args.budget is not None:
        kw["budget"] = args.budget
    config = ExperimentConfig(**kw)
    report = run(config)
    if args.out:
        for path in write_report(report, config):
            print(f"wrote {path}", file=sys.stderr)
    else:
        sys.stdout.write(report_json(report, config) + "\n" if args.format == "json" else report_csv(report))
    for name, ok in report.checks.items():
        print(f"{'PASS' if ok else 'FAIL'} {name}", file=sys.stderr)
    return 0 if report.ok else 2


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="lorentzmax", description="Maximal operators and Lorentz norms on finite metric measure spaces.")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="check a space file")
    p.add_argument("space")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("gen", help="build a test space")
    gs = p.add_subparsers(dest="family", required=True, parser_class=_Parser)
    for fam in ("first", "first-prime"):
        g = gs.add_parser(fam)
        g.add_argument("--m", type=_ints, required=True, help="comma-separated sequence")
        g.add_argument("--out")
    g = gs.add_parser("second")
    for k in ("p", "q", "r"):
        g.add_argument(f"--{k}", type=_real, required=True)
    g.add_argument("--l", type=int, required=True)
    g.add_argument("--out")
    g = gs.add_parser("second-prime")
    for k in ("p", "q"):
        g.add_argument(f"--{k}", type=_real, required=True)
    g.add_argument("--l", type=int, required=True)
    g.add_argument("--out")
    g = gs.add_parser("combined")
    g.add_argument("--components", nargs="+", required=True)
    g.add_argument("--out")
    g = gs.add_parser("thm1")
    g.add_argument("--case", choices=CASES, required=True)
    for k in ("p0", "q0", "r0"):
        g.add_argument(f"--{k}", type=_real, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("maximal", help="maximal function of a function file")
    p.add_argument("space")
    p.add_argument("function")
    p.add_argument("--out")
    p.set_defaults(func=cmd_maximal)

    p = sub.add_parser("norm", help="Lorentz norm of a function file")
    p.add_argument("space")
    p.add_argument("function")
    p.add_argument("--p", type=_real, required=True)
    p.add_argument("--q", type=_real, required=True)
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("cnorm", help="lower bound for the operator constant")
    p.add_argument("space")
    for k in ("p", "q", "r"):
        p.add_argument(f"--{k}", type=_real, required=True)
    p.add_argument("--method", choices=("restricted", "witness", "search"), default="restricted")
    p.add_argument("--function", help="witness function file (witness method)")
    p.add_argument("--budget", type=int, default=2000)
    p.add_argument("--subset-budget", type=int, default=1 << 21)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="save the witness function here")
    p.set_defaults(func=cmd_cnorm)

    p = sub.add_parser("experiment", help="run a trend sweep")
    p.add_argument("name", choices=EXPERIMENTS)
    p.add_argument("--p0", type=_real, default=2.0)
    p.add_argument("--q0", type=_real, default=1.0)
    p.add_argument("--r0", type=_real, default=2.0)
    p.add_argument("--sweep", type=_ints)
    p.add_argument("--r-grid", type=_reals)
    p.add_argument("--budget", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_experiment)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, LorentzMaxError, OSError, json.JSONDecodeError) as exc:
        print(f"lorentzmax: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
