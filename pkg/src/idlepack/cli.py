"""Command-line surface.

Verbs: solve-sched, solve-pack, oracle-sched, oracle-pack, verify, gen,
bench.  Exit codes are a stable contract: 0 success, 2 infeasible or invalid
input, 3 oracle limit exceeded; bench exits 1 when some instance breaks its
proven bound.  All values cross the boundary as exact rational text.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path
from typing import List, Optional

from .bench import load_config, render_figures, run_benchmark, write_csv
from .bpu import solve_pack
from .gen import GenSpec, generate_instance
from .ioformat import (
    FormatError,
    InstanceFile,
    SolutionFile,
    emit_instance,
    emit_solution,
    read_instance,
    read_solution,
    verify_solution,
)
from .model import Eps, verify_schedule
from .oracle import Exceeded, OracleLimits, exact_bincount, exact_makespan
from .sup import solve_sched

EXIT_OK = 0
EXIT_BOUND = 1
EXIT_INVALID = 2
EXIT_LIMIT = 3


def _fail(msg: str) -> int:
    print("error: %s" % msg, file=sys.stderr)
    return EXIT_INVALID


def _write(path: Optional[str], text: str) -> None:
    if path is not None:
        Path(path).write_text(text)


def _eps(text: str) -> Eps:
    return Eps(Fraction(text))


def _empty_solution(f: InstanceFile) -> SolutionFile:
    if f.kind == "scheduling":
        return SolutionFile("scheduling", ((),) * f.m, makespan=Fraction(0))
    return SolutionFile("packing", ())


def _cmd_solve(args, kind: str) -> int:
    try:
        eps = _eps(args.eps)
        f = read_instance(args.input)
    except (ValueError, OSError) as e:
        return _fail(str(e))
    if f.kind != kind:
        return _fail("expected a %s instance, got %s" % (kind, f.kind))
    if not f.sizes:
        sol = _empty_solution(f)
        _write(args.output, emit_solution(sol))
        print("makespan 0" if kind == "scheduling" else "bins 0")
        return EXIT_OK
    inst = f.to_instance()
    if kind == "scheduling":
        res = solve_sched(inst, eps)
        bad = verify_schedule(inst, res.schedule, res.makespan)
        if bad:
            return _fail("; ".join(bad))
        sol = SolutionFile("scheduling", res.schedule.machines, makespan=res.makespan)
        _write(args.output, emit_solution(sol))
        print("makespan %s" % res.makespan)
    else:
        res = solve_pack(inst, eps)
        sol = SolutionFile("packing", res.packing.bins)
        _write(args.output, emit_solution(sol))
        print("bins %d" % res.nbins)
    return EXIT_OK


def _cmd_oracle(args, kind: str) -> int:
    try:
        f = read_instance(args.input)
    except (ValueError, OSError) as e:
        return _fail(str(e))
    if f.kind != kind:
        return _fail("expected a %s instance, got %s" % (kind, f.kind))
    if not f.sizes:
        _write(args.output, emit_solution(_empty_solution(f)))
        print("makespan 0" if kind == "scheduling" else "bins 0")
        return EXIT_OK
    inst = f.to_instance()
    limits = OracleLimits()
    if kind == "scheduling":
        got = exact_makespan(inst, limits)
        if isinstance(got, Exceeded):
            print("error: oracle limit exceeded: %s" % got.reason, file=sys.stderr)
            return EXIT_LIMIT
        value, sched = got
        sol = SolutionFile("scheduling", sched.machines, makespan=value)
        _write(args.output, emit_solution(sol))
        print("makespan %s" % value)
    else:
        got = exact_bincount(inst, limits)
        if isinstance(got, Exceeded):
            print("error: oracle limit exceeded: %s" % got.reason, file=sys.stderr)
            return EXIT_LIMIT
        value, pack = got
        sol = SolutionFile("packing", pack.bins)
        _write(args.output, emit_solution(sol))
        print("bins %d" % value)
    return EXIT_OK


def _cmd_verify(args) -> int:
    try:
        f = read_instance(args.input)
        sol = read_solution(args.solution)
    except (ValueError, OSError) as e:
        return _fail(str(e))
    bad = verify_solution(f, sol)
    if bad:
        for line in bad:
            print("violation: %s" % line, file=sys.stderr)
        return EXIT_INVALID
    print("ok")
    return EXIT_OK


def _cmd_gen(args) -> int:
    try:
        spec = GenSpec(
            kind=args.kind,
            n=args.n,
            k=args.k,
            U=Fraction(args.U),
            dist=args.dist,
            seed=args.seed,
            m=args.m,
        )
        f = generate_instance(spec)
    except ValueError as e:
        return _fail(str(e))
    text = emit_instance(f)
    if args.output is None:
        sys.stdout.write(text)
    else:
        _write(args.output, text)
        print("wrote %s (n=%d)" % (args.output, f.n))
    return EXIT_OK


def _cmd_bench(args) -> int:
    try:
        cfg = load_config(args.config)
    except (ValueError, OSError) as e:
        return _fail(str(e))
    report = run_benchmark(cfg)
    write_csv(report, cfg.csv_path)
    figures = [] if args.no_plots else render_figures(report, cfg.csv_path)
    extra = " and %s" % ", ".join(str(p) for p in figures) if figures else ""
    print("wrote %s (%d rows)%s" % (cfg.csv_path, len(report.rows), extra))
    for v in report.violations:
        print("violation: %s" % v, file=sys.stderr)
    return EXIT_BOUND if report.violations else EXIT_OK


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="idlepack",
        description="Scheduling and bin packing with cardinality-triggered idle periods.",
    )
    sub = p.add_subparsers(dest="cmd", required=True)

    for name, kind in (("solve-sched", "scheduling"), ("solve-pack", "packing")):
        sp = sub.add_parser(name, help="approximation scheme for a %s instance" % kind)
        sp.add_argument("--eps", required=True, help="accuracy parameter, a unit fraction like 1/2")
        sp.add_argument("--input", required=True, help="instance file")
        sp.add_argument("--output", help="write the solution file here")
        sp.set_defaults(func=lambda a, k=kind: _cmd_solve(a, k))

    for name, kind in (("oracle-sched", "scheduling"), ("oracle-pack", "packing")):
        sp = sub.add_parser(name, help="exact branch-and-bound for a %s instance" % kind)
        sp.add_argument("--input", required=True, help="instance file")
        sp.add_argument("--output", help="write the witness solution here")
        sp.set_defaults(func=lambda a, k=kind: _cmd_oracle(a, k))

    sp = sub.add_parser("verify", help="re-verify a solution file against its instance")
    sp.add_argument("--input", required=True, help="instance file")
    sp.add_argument("--solution", required=True, help="solution file")
    sp.set_defaults(func=_cmd_verify)

    sp = sub.add_parser("gen", help="generate a seeded instance file")
    sp.add_argument("--kind", required=True, choices=("scheduling", "packing"))
    sp.add_argument("--n", required=True, type=int, help="item count (adversarial mode may round up)")
    sp.add_argument("--k", required=True, type=int, help="idle period after every k jobs")
    sp.add_argument("--U", required=True, help="idle period length, exact rational")
    sp.add_argument("--m", type=int, help="machine count (scheduling only)")
    sp.add_argument("--dist", default="uniform", choices=("uniform", "clustered", "adversarial"))
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--output", help="write here instead of stdout")
    sp.set_defaults(func=_cmd_gen)

    sp = sub.add_parser("bench", help="run a benchmark config: CSV report plus figures")
    sp.add_argument("--config", required=True, help="JSON config file")
    sp.add_argument("--no-plots", action="store_true", help="skip the PNG figures, CSV only")
    sp.set_defaults(func=_cmd_bench)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = _parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
