"""Benchmark harness: solve + oracle per generated instance, CSV + figures.

A config file lists generator specs plus one accuracy parameter; each
instance is solved by the scheme, ground-truthed by the exact oracle when it
fits the limits, and reported as one CSV row.  Rows where the oracle gave up
keep their algorithm value but leave the ratio cell blank.  A run "fails"
exactly when some row breaks its proven bound:

    scheduling          alg <= (1+e)^3 (1+3e) * opt
    packing, case I     alg <= (1+2e) * opt + 1/e^3
    packing, case II    alg <= (1+10e)((1+3e) opt + 5 + 3/e + 1/e^3) + 2 + e*opt + 1

Bound checks are exact rational; the CSV renders ratios and wall times as
decimals for downstream tools, and two scatter plots (ratio vs n, time vs n)
are rendered next to the CSV so a run leaves a self-contained report behind.

Workers: set IDLEPACK_WORKERS=<count> to fan instances out over processes;
each worker owns its instance end to end, assembly stays in config order.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import repeat
from pathlib import Path
from time import perf_counter
from typing import List, NamedTuple, Optional, Tuple, Union

from .bpu import Case, choose_case, solve_pack
from .gen import GenSpec, generate_instance
from .ioformat import FormatError, _int, _rat
from .model import Eps, verify_packing, verify_schedule
from .oracle import Exceeded, OracleLimits, exact_bincount, exact_makespan
from .sup import solve_sched

CSV_HEADER = ("seed", "n", "m", "k", "U", "eps", "algorithm", "oracle", "ratio", "wall_time")


class BenchRow(NamedTuple):
    seed: int
    n: int
    m: Optional[int]
    k: int
    U: Fraction
    eps: Eps
    algorithm: Fraction
    oracle: Union[Fraction, None]  # None: oracle exceeded its limits
    wall_time: float

    @property
    def ratio(self) -> Optional[Fraction]:
        if self.oracle is None or self.oracle == 0:
            return None
        return self.algorithm / self.oracle


@dataclass
class BenchReport:
    rows: List[BenchRow]
    violations: List[str]


@dataclass(frozen=True)
class BenchConfig:
    eps: Eps
    csv_path: Path
    specs: Tuple[GenSpec, ...]
    limits: OracleLimits


def sched_bound(eps: Eps, opt: Fraction) -> Fraction:
    return (1 + eps.value) ** 3 * (1 + 3 * eps.value) * opt


def pack_bound(eps: Eps, opt: Fraction, case: Case) -> Fraction:
    e, inv = eps.value, eps.inv
    if case is Case.I:
        return (1 + 2 * e) * opt + inv**3
    return (1 + 10 * e) * ((1 + 3 * e) * opt + 5 + 3 * inv + inv**3) + 2 + e * opt + 1


def load_config(path) -> BenchConfig:
    """Parse a bench config; paths are taken relative to the config file.

    Schema: {"eps": "p/q", "csv": "report.csv", "instances": [genspec...],
    "oracle": {"max_jobs": ..., "max_nodes": ..., "time_budget": ...}} with
    the oracle block optional, and each genspec {kind, n, k, U, dist, seed, m}.
    """
    path = Path(path)
    try:
        obj = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise FormatError("json", str(e))
    if not isinstance(obj, dict):
        raise FormatError("json", "top level must be an object")
    for key in obj:
        if key not in ("eps", "csv", "instances", "oracle"):
            raise FormatError(key, "unexpected field")
    for key in ("eps", "csv", "instances"):
        if key not in obj:
            raise FormatError(key, "missing field")
    try:
        eps = Eps(_rat("eps", obj["eps"]))
    except ValueError as e:
        raise FormatError("eps", str(e))
    if not isinstance(obj["csv"], str):
        raise FormatError("csv", "expected a path string")
    if not isinstance(obj["instances"], list):
        raise FormatError("instances", "expected a list of generator specs")
    specs = []
    for i, raw in enumerate(obj["instances"]):
        field = "instances[%d]" % i
        if not isinstance(raw, dict):
            raise FormatError(field, "expected an object")
        for key in raw:
            if key not in ("kind", "n", "k", "U", "dist", "seed", "m"):
                raise FormatError("%s.%s" % (field, key), "unexpected field")
        for key in ("kind", "n", "k", "U"):
            if key not in raw:
                raise FormatError("%s.%s" % (field, key), "missing field")
        specs.append(
            GenSpec(
                kind=raw["kind"],
                n=_int(field + ".n", raw["n"]),
                k=_int(field + ".k", raw["k"]),
                U=_rat(field + ".U", raw["U"]),
                dist=raw.get("dist", "uniform"),
                seed=_int(field + ".seed", raw.get("seed", 0)),
                m=_int(field + ".m", raw["m"]) if raw.get("m") is not None else None,
            )
        )
    limits = OracleLimits()
    if "oracle" in obj:
        raw = obj["oracle"]
        if not isinstance(raw, dict):
            raise FormatError("oracle", "expected an object")
        for key in raw:
            if key not in ("max_jobs", "max_nodes", "time_budget"):
                raise FormatError("oracle.%s" % key, "unexpected field")
        limits = OracleLimits(
            max_jobs=_int("oracle.max_jobs", raw.get("max_jobs", limits.max_jobs)),
            max_nodes=_int("oracle.max_nodes", raw.get("max_nodes", limits.max_nodes)),
            time_budget=float(raw.get("time_budget", limits.time_budget)),
        )
    return BenchConfig(
        eps=eps,
        csv_path=path.parent / obj["csv"],
        specs=tuple(specs),
        limits=limits,
    )


def _run_one(spec: GenSpec, eps: Eps, limits: OracleLimits) -> Tuple[BenchRow, Optional[str]]:
    """Generate, solve, oracle, and bound-check one instance."""
    f = generate_instance(spec)
    tag = "kind=%s seed=%d n=%d" % (spec.kind, spec.seed, len(f.sizes))
    if not f.sizes:
        row = BenchRow(spec.seed, 0, spec.m, spec.k, spec.U, eps, Fraction(0), Fraction(0), 0.0)
        return row, None
    inst = f.to_instance()
    violation = None
    if f.kind == "scheduling":
        t0 = perf_counter()
        res = solve_sched(inst, eps)
        wall = perf_counter() - t0
        alg = res.makespan
        bad = verify_schedule(inst, res.schedule, res.makespan)
        if bad:
            violation = "%s: %s" % (tag, "; ".join(bad))
        got = exact_makespan(inst, limits)
        opt = None if isinstance(got, Exceeded) else got[0]
        if opt is not None and violation is None and alg > sched_bound(eps, opt):
            violation = "%s: makespan %s exceeds bound %s" % (tag, alg, sched_bound(eps, opt))
    else:
        t0 = perf_counter()
        res = solve_pack(inst, eps)
        wall = perf_counter() - t0
        alg = Fraction(res.nbins)
        bad = verify_packing(inst, res.packing)
        if bad:
            violation = "%s: %s" % (tag, "; ".join(bad))
        got = exact_bincount(inst, limits)
        opt = None if isinstance(got, Exceeded) else Fraction(got[0])
        case = choose_case(inst.k, inst.U, eps)
        if opt is not None and violation is None and alg > pack_bound(eps, opt, case):
            violation = "%s: %d bins exceed bound %s" % (tag, res.nbins, pack_bound(eps, opt, case))
    row = BenchRow(spec.seed, len(f.sizes), spec.m, spec.k, spec.U, eps, alg, opt, wall)
    return row, violation


def run_benchmark(cfg: BenchConfig) -> BenchReport:
    """Execute every spec (possibly across worker processes) and collect rows."""
    workers = max(1, int(os.environ.get("IDLEPACK_WORKERS", "1")))
    if workers > 1 and len(cfg.specs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_run_one, cfg.specs, repeat(cfg.eps), repeat(cfg.limits)))
    else:
        results = [_run_one(s, cfg.eps, cfg.limits) for s in cfg.specs]
    rows = [row for row, _ in results]
    violations = [v for _, v in results if v is not None]
    return BenchReport(rows=rows, violations=violations)


def write_csv(report: BenchReport, path: Path) -> None:
    """One row per instance; header always present, hence valid when empty."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(CSV_HEADER)
        for r in report.rows:
            ratio = r.ratio
            w.writerow(
                [
                    r.seed,
                    r.n,
                    "" if r.m is None else r.m,
                    r.k,
                    str(r.U),
                    str(r.eps),
                    str(r.algorithm),
                    "Exceeded" if r.oracle is None else str(r.oracle),
                    "" if ratio is None else "%.6f" % float(ratio),
                    "%.4f" % r.wall_time,
                ]
            )


def render_figures(report: BenchReport, csv_path: Path) -> List[Path]:
    """Scatter plots next to the CSV: ratio vs n and wall time vs n."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out = []
    by_kind = {"scheduling": "tab:blue", "packing": "tab:orange"}
    for suffix, picker, ylabel in (
        ("ratio", lambda r: r.ratio, "algorithm / oracle"),
        ("time", lambda r: r.wall_time, "solve wall time [s]"),
    ):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        for kind, color in by_kind.items():
            is_sched = kind == "scheduling"
            pts = [
                (r.n, picker(r))
                for r in report.rows
                if (r.m is not None) == is_sched and picker(r) is not None
            ]
            if pts:
                ax.scatter(
                    [p[0] for p in pts],
                    [float(p[1]) for p in pts],
                    s=14,
                    color=color,
                    label=kind,
                )
        ax.set_xlabel("n")
        ax.set_ylabel(ylabel)
        if ax.has_data():
            ax.legend(loc="best", fontsize=8)
        fig.tight_layout()
        target = csv_path.with_name(csv_path.stem + "_%s.png" % suffix)
        fig.savefig(target, dpi=150)
        plt.close(fig)
        out.append(target)
    return out
