"""Feasibility MILP over configuration counters (integer) and small-job splits.

Constraint families, with x_c the number of machines running configuration c,
y_jc / z_jc the early/late fraction of small job j on configuration c:

  (1) sum_c x_c = m
  (2) sum_c (y_jc + z_jc) = 1                          for every small job j
  (3) sum_j y_jc p_j     <= x_c (beta_c+1) eps T       for every c
  (4) sum_j z_jc ptil_j  <= x_c gamma'_c (gamma_c+1) eps T
  (5) sum_c alpha_cl x_c  = |L_l|                      for every large size l
  (6,8,9,10) ranges: x integer >= 0, y,z in [0,1]
  (7) sum_l alpha_cl x_c + sum_j y_jc <= x_c delta_c k

The fixed-dimension integer programming machinery the theory leans on is
replaced by depth-first branch-and-bound on x with an aggregated LP
relaxation for pruning; at integral x the exact (y,z) system is decided by a
rational feasibility LP, so the accept/reject decision is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .lp import EQ, GE, LE, BasicSolution, LPModel, basic_feasible
from .model import InternalError
from .sup import Configuration, JobClassification, RoundedInstance

ZERO = Fraction(0)


class NodeLimit(Exception):
    """Branch-and-bound node budget exhausted before a certified answer."""


@dataclass(frozen=True)
class Infeasible:
    """Certified: no integer x with feasible (y,z) exists for this T."""


@dataclass(frozen=True)
class MILPModel:
    configs: Tuple[Configuration, ...]
    m: int
    k: int
    U: Fraction
    T: Fraction
    eps_value: Fraction
    small: Tuple[int, ...]  # job ids
    small_sizes: Tuple[Fraction, ...]  # rounded p_j, aligned with `small`
    small_modified: Tuple[Fraction, ...]  # p_j + U/k
    large_counts: Dict[Fraction, int]  # |L_l| per size l in H


@dataclass(frozen=True)
class MILPSolution:
    x: Dict[Configuration, int]
    y: Dict[Tuple[int, Configuration], Fraction]
    z: Dict[Tuple[int, Configuration], Fraction]


def build_milp(
    configs: Sequence[Configuration],
    cls: JobClassification,
    rinst: RoundedInstance,
    T: Fraction,
) -> MILPModel:
    inst = rinst.original
    small_sizes = tuple(rinst.rounded_sizes[j] for j in cls.small)
    ut = inst.U / inst.k
    counts: Dict[Fraction, int] = {s: 0 for s in cls.large_sizes}
    for j in cls.large:
        counts[rinst.rounded_sizes[j]] += 1
    return MILPModel(
        configs=tuple(configs),
        m=inst.m,
        k=inst.k,
        U=inst.U,
        T=T,
        eps_value=rinst.eps.value,
        small=tuple(cls.small),
        small_sizes=small_sizes,
        small_modified=tuple(p + ut for p in small_sizes),
        large_counts=counts,
    )


def _budgets(model: MILPModel, c: Configuration) -> Tuple[Fraction, Fraction, int]:
    """(early size budget, late modified-size budget, early slot count) per copy."""
    eT = model.eps_value * model.T
    early_size = (c.beta + 1) * eT
    late_size = c.gamma_prime * (c.gamma + 1) * eT
    slots = c.delta * model.k - c.alpha_total
    return early_size, late_size, slots


def _usable(model: MILPModel) -> List[int]:
    """Configurations not ruled out by the large-job supply (alpha <= |L|)."""
    out = []
    for ci, c in enumerate(model.configs):
        if all(cnt <= model.large_counts.get(s, 0) for s, cnt in c.alpha):
            out.append(ci)
    return out


def _frontier(model: MILPModel, usable: List[int]) -> List[int]:
    """Drop configurations dominated by one with looser budgets.

    c' dominates c when they share alpha and gamma_prime and c' has
    componentwise >= (beta, gamma, delta): every solution using c remains
    feasible after swapping in c', so only maximal ones matter for the
    feasibility question.  (The model itself keeps the full set.)
    """
    keep = []
    by_key: Dict[Tuple, List[int]] = {}
    for ci in usable:
        c = model.configs[ci]
        by_key.setdefault((c.alpha, c.gamma_prime), []).append(ci)
    for group in by_key.values():
        for ci in group:
            c = model.configs[ci]
            dominated = any(
                cj != ci
                and model.configs[cj].beta >= c.beta
                and model.configs[cj].gamma >= c.gamma
                and model.configs[cj].delta >= c.delta
                and (
                    model.configs[cj].beta > c.beta
                    or model.configs[cj].gamma > c.gamma
                    or model.configs[cj].delta > c.delta
                )
                for cj in group
            )
            if not dominated:
                keep.append(ci)
    return keep


def _relax_feasible(
    model: MILPModel, active: List[int], fixed: Dict[int, int]
) -> Optional[BasicSolution]:
    """Aggregated LP relaxation of (1)-(10) with x continuous; None if empty.

    Per-job early fractions f_j replace the per-configuration y/z split;
    every feasible (x,y,z) projects onto a feasible (x,f), so an infeasible
    relaxation certifies an empty subtree.
    """
    lp = LPModel()
    nsmall = len(model.small)
    lp.add_row({("x", ci): 1 for ci in active}, EQ, model.m)
    for s, cnt in model.large_counts.items():
        lp.add_row(
            {("x", ci): model.configs[ci].alpha_count(s) for ci in active}, EQ, cnt
        )
    row3 = {("f", i): model.small_sizes[i] for i in range(nsmall)}
    for ci in active:
        e, _, _ = _budgets(model, model.configs[ci])
        row3[("x", ci)] = -e
    lp.add_row(row3, LE, 0)
    row4 = {("f", i): model.small_modified[i] for i in range(nsmall)}
    for ci in active:
        _, l, _ = _budgets(model, model.configs[ci])
        row4[("x", ci)] = l
    lp.add_row(row4, GE, sum(model.small_modified, ZERO))
    row7 = {("f", i): Fraction(-1) for i in range(nsmall)}
    total_large = sum(model.large_counts.values())
    for ci in active:
        row7[("x", ci)] = Fraction(model.configs[ci].delta * model.k)
    lp.add_row(row7, GE, total_large)
    for i in range(nsmall):
        lp.add_row({("f", i): 1}, LE, 1)
    for ci, v in fixed.items():
        lp.add_row({("x", ci): 1}, EQ, v)
    sol = basic_feasible(lp)
    return sol if isinstance(sol, BasicSolution) else None


def _leaf(
    model: MILPModel, xvec: Dict[int, int]
) -> Optional[Tuple[Dict[Tuple[int, Configuration], Fraction], Dict[Tuple[int, Configuration], Fraction]]]:
    """Exact (y,z) feasibility at integral x; None when the LP is empty."""
    used = [ci for ci, v in xvec.items() if v > 0]
    nsmall = len(model.small)
    if nsmall == 0:
        for ci in used:
            c = model.configs[ci]
            if c.alpha_total > c.delta * model.k:
                return None
        return {}, {}
    lp = LPModel()
    for i in range(nsmall):
        lp.add_row(
            dict(
                [(("y", i, ci), Fraction(1)) for ci in used]
                + [(("z", i, ci), Fraction(1)) for ci in used]
            ),
            EQ,
            1,
        )
    for ci in used:
        c = model.configs[ci]
        e, l, slots = _budgets(model, c)
        xv = xvec[ci]
        lp.add_row(
            {("y", i, ci): model.small_sizes[i] for i in range(nsmall)}, LE, xv * e
        )
        lp.add_row(
            {("z", i, ci): model.small_modified[i] for i in range(nsmall)}, LE, xv * l
        )
        lp.add_row(
            {("y", i, ci): Fraction(1) for i in range(nsmall)}, LE, xv * slots
        )
    sol = basic_feasible(lp)
    if not isinstance(sol, BasicSolution):
        return None
    y = {}
    z = {}
    for i in range(nsmall):
        j = model.small[i]
        for ci in used:
            c = model.configs[ci]
            yv = sol[("y", i, ci)]
            zv = sol[("z", i, ci)]
            if yv:
                y[(j, c)] = yv
            if zv:
                z[(j, c)] = zv
    return y, z


def check_milp(model: MILPModel, sol: MILPSolution) -> List[str]:
    """Exact re-check of all ten constraint families; [] when clean."""
    out = []
    if sum(sol.x.values()) != model.m:
        out.append("sum x = %s, want m = %d" % (sum(sol.x.values()), model.m))
    if any(v < 0 for v in sol.x.values()):
        out.append("negative configuration counter")
    eT = model.eps_value * model.T
    for s, want in model.large_counts.items():
        got = sum(c.alpha_count(s) * v for c, v in sol.x.items())
        if got != want:
            out.append("large size %s: slots %s != count %d" % (s, got, want))
    index_of = {j: i for i, j in enumerate(model.small)}
    for j in model.small:
        tot = sum(
            (sol.y.get((j, c), ZERO) + sol.z.get((j, c), ZERO) for c in sol.x), ZERO
        )
        if tot != 1:
            out.append("job %d assigned mass %s != 1" % (j, tot))
    for c, v in sol.x.items():
        ymass = sum(
            (sol.y.get((j, c), ZERO) * model.small_sizes[index_of[j]] for j in model.small),
            ZERO,
        )
        if ymass > v * (c.beta + 1) * eT:
            out.append("config %s early size budget broken" % (c,))
        zmass = sum(
            (
                sol.z.get((j, c), ZERO) * model.small_modified[index_of[j]]
                for j in model.small
            ),
            ZERO,
        )
        if zmass > v * c.gamma_prime * (c.gamma + 1) * eT:
            out.append("config %s late size budget broken" % (c,))
        ycount = sum((sol.y.get((j, c), ZERO) for j in model.small), ZERO)
        if c.alpha_total * v + ycount > v * c.delta * model.k:
            out.append("config %s early cardinality broken" % (c,))
    for key, val in list(sol.y.items()) + list(sol.z.items()):
        if not (0 <= val <= 1):
            out.append("fraction %s out of [0,1] at %s" % (val, key))
    return out


def solve_milp(model: MILPModel, max_nodes: int = 50_000):
    """Feasible MILPSolution, certified Infeasible, or raises NodeLimit."""
    usable = _usable(model)
    active = _frontier(model, usable)
    if not active:
        return Infeasible()
    nodes = 0
    leaf_cache: Dict[Tuple[Tuple[int, int], ...], bool] = {}

    def try_leaf(xint: Dict[int, int]):
        key = tuple(sorted((ci, v) for ci, v in xint.items() if v > 0))
        if leaf_cache.get(key) is False:
            return None
        leaf = _leaf(model, xint)
        leaf_cache[key] = leaf is not None
        if leaf is None:
            return None
        y, z = leaf
        return MILPSolution(
            x={model.configs[ci]: v for ci, v in xint.items() if v > 0}, y=y, z=z
        )

    def descend(fixed: Dict[int, int]):
        nonlocal nodes
        nodes += 1
        if nodes > max_nodes:
            raise NodeLimit("solve_milp: %d nodes" % max_nodes)
        remaining = model.m - sum(fixed.values())
        if remaining < 0:
            return None
        relax = _relax_feasible(model, active, fixed)
        if relax is None:
            return None
        xvals = {ci: relax[("x", ci)] for ci in active}
        if all(v.denominator == 1 for v in xvals.values()):
            res = try_leaf({ci: int(v) for ci, v in xvals.items()})
            if res is not None:
                return res
            if remaining == 0:
                # All unfixed counters are forced to zero by (1), so the
                # integral point just rejected was the only candidate here.
                return None
        unfixed = [ci for ci in active if ci not in fixed]
        if not unfixed:
            return None
        frac = [(ci, xvals[ci]) for ci in unfixed]
        branch = max(
            frac,
            key=lambda t: (min(t[1] - int(t[1]), 1 - (t[1] - int(t[1]))), -t[0]),
        )[0]
        target = xvals[branch]
        values = sorted(range(remaining + 1), key=lambda v: (abs(v - target), v))
        for v in values:
            res = descend({**fixed, branch: v})
            if res is not None:
                return res
        return None

    import sys

    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, len(active) * 4 + 1000))
    try:
        res = descend({})
    finally:
        sys.setrecursionlimit(old)
    if res is None:
        return Infeasible()
    bad = check_milp(model, res)
    if bad:
        raise InternalError("solver returned a violating MILP solution: %s" % bad)
    return res
