"""Case II (kmax > 1/eps^2): reformulated packing with aggregated columns.

Large items are grouped as in case I, but small items stay individual: the
master LP carries, besides the covering rows over large sizes, one row per
small item and three budget rows per gamma-value eta (early size, late
modified size, early cardinality).  Bin columns are priced by guessing
(alpha', gamma, gamma', delta) and solving a two-constraint IP whose sizes
are rounded to n/eps grid steps; candidates are re-checked against the
exact dual constraint before entering the master, with a bounded exact
enumeration as fallback so the accept/reject verdict is never an artifact
of the rounding.

The integral phase opens ceil(u*) bins, places large items, decides small
items by an exact per-bin feasibility LP, packs the fractional leftovers
into dedicated bins of ceil(1/(2 eps)) items, and repairs bins that carry
late items by shedding about 2 eps of modified size into merge bins.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

from .bpu import GroupedItems, classify_items, linear_grouping
from .lp import EQ, GE, LE, BasicSolution, Column, LPModel, NO_COLUMN, basic_feasible, column_generation
from .model import InternalError, Packing, PackingInstance, bin_load
from .sup import Eps

ZERO = Fraction(0)
ONE = Fraction(1)


def modified_size(s: Fraction, k: int, U: Fraction) -> Fraction:
    """s + U/k, the late-item charge carrying its own share of idling.

    >>> modified_size(Fraction(1, 10), 5, Fraction(1, 2))
    Fraction(1, 5)
    """
    if U <= 0:
        raise ValueError("U must be positive")
    return s + U / k


def bpu2_load(sizes_in_order: Sequence[Fraction], k: int, U: Fraction, eps: Eps) -> Fraction:
    """Bin load under the early/late reformulation (first k/eps are early)."""
    sizes = list(sizes_in_order)
    cap = k * eps.inv
    if len(sizes) <= cap:
        if not sizes:
            return ZERO
        return bin_load(sizes, k, U)
    early, late = sizes[:cap], sizes[cap:]
    return (
        sum(early, ZERO)
        + sum((modified_size(s, k, U) for s in late), ZERO)
        + Fraction(cap, k) * U
    )


@dataclass(frozen=True)
class BinConfigII:
    """Bin sketch: exact large content, bucketed small budgets.

    gamma buckets the late modified size in units of eps; delta-1 counts the
    idle items among early positions; gamma_prime flags late presence.
    """

    alpha: Tuple[Tuple[Fraction, int], ...]  # ((size, count), ...) descending
    delta: int
    gamma: int
    gamma_prime: int

    def load(self, U: Fraction, eps: Eps) -> Fraction:
        large = sum((z * c for z, c in self.alpha), ZERO)
        return (
            large
            + self.gamma_prime * self.gamma * eps.value
            + (self.delta - 1 + self.gamma_prime) * U
        )

    def budgets(self, k: int, U: Fraction, eps: Eps) -> Tuple[Fraction, Fraction, int]:
        """(zeta_e, zeta_l, zeta_n): early size, late modified size, early count."""
        ze = 1 - self.load(U, eps)
        zl = self.gamma_prime * (self.gamma + 1) * eps.value
        zn = self.delta * k - sum(c for _, c in self.alpha)
        return ze, zl, zn

    def violations(self, k: int, U: Fraction, eps: Eps) -> List[str]:
        out = []
        if self.delta < 1:
            out.append("delta %d < 1" % self.delta)
        if self.gamma_prime not in (0, 1):
            out.append("gamma' must be 0 or 1")
        if self.gamma_prime == 0 and self.gamma != 0:
            out.append("gamma' = 0 forces gamma = 0")
        if not 0 <= self.gamma <= eps.inv:
            out.append("gamma %d outside 0..%d" % (self.gamma, eps.inv))
        if any(c < 1 for _, c in self.alpha):
            out.append("zero alpha entry")
        if self.load(U, eps) > 1:
            out.append("load %s > 1" % (self.load(U, eps),))
        if sum(c for _, c in self.alpha) > self.delta * k:
            out.append("more large items than early slots")
        return out


class Case2Master(NamedTuple):
    model: LPModel
    size_classes: Tuple[Tuple[Fraction, int], ...]
    small: Tuple[int, ...]
    row_large: Dict[Fraction, int]
    row_item: Dict[int, int]
    row_esize: Dict[int, int]
    row_lsize: Dict[int, int]
    row_count: Dict[int, int]


class Case2Duals(NamedTuple):
    lam: Dict[Fraction, Fraction]
    mu: Dict[int, Fraction]
    nu: Dict[int, Fraction]
    xi: Dict[int, Fraction]
    rho: Dict[int, Fraction]


def _config_var(cfg: BinConfigII):
    return ("bin", cfg)


def _config_coeffs(master: Case2Master, cfg: BinConfigII, k: int, U: Fraction, eps: Eps) -> Dict[int, Fraction]:
    ze, zl, zn = cfg.budgets(k, U, eps)
    coeffs: Dict[int, Fraction] = {}
    for z, c in cfg.alpha:
        coeffs[master.row_large[z]] = Fraction(c)
    eta = cfg.gamma
    if ze:
        coeffs[master.row_esize[eta]] = ze
    if zl:
        coeffs[master.row_lsize[eta]] = zl
    if zn:
        coeffs[master.row_count[eta]] = Fraction(zn)
    return coeffs


def build_master_case2(
    g: GroupedItems,
    small: Sequence[int],
    sizes: Sequence[Fraction],
    k: int,
    U: Fraction,
    eps: Eps,
) -> Case2Master:
    """Rows (11)-(17): coverage, per-item assignment, per-eta budget ties.

    v/w variables are aggregated by the gamma value eta of the receiving
    configuration; bin columns arrive lazily from pricing.
    """
    lp = LPModel()
    lp.sense = "min"
    row_large = {}
    for z, count in g.size_classes:
        row_large[z] = lp.add_row({}, GE, count)
    row_item = {}
    etas = range(eps.inv + 1)
    for i in small:
        row_item[i] = lp.add_row(
            {("v", i, eta): 1 for eta in etas} | {("w", i, eta): 1 for eta in etas},
            GE,
            1,
        )
    row_esize = {}
    row_lsize = {}
    row_count = {}
    for eta in etas:
        row_esize[eta] = lp.add_row(
            {("v", i, eta): -sizes[i] for i in small}, GE, 0
        )
        row_lsize[eta] = lp.add_row(
            {("w", i, eta): -modified_size(sizes[i], k, U) for i in small}, GE, 0
        )
        row_count[eta] = lp.add_row({("v", i, eta): -1 for i in small}, GE, 0)
    return Case2Master(
        model=lp,
        size_classes=g.size_classes,
        small=tuple(small),
        row_large=row_large,
        row_item=row_item,
        row_esize=row_esize,
        row_lsize=row_lsize,
        row_count=row_count,
    )


def split_duals(master: Case2Master, duals: Sequence[Fraction]) -> Case2Duals:
    return Case2Duals(
        lam={z: duals[r] for z, r in master.row_large.items()},
        mu={i: duals[r] for i, r in master.row_item.items()},
        nu={e: duals[r] for e, r in master.row_esize.items()},
        xi={e: duals[r] for e, r in master.row_lsize.items()},
        rho={e: duals[r] for e, r in master.row_count.items()},
    )


def rounded_ip(
    classes: Sequence[Tuple[Fraction, Fraction]],
    aprime: int,
    cap: Fraction,
    eps: Eps,
    n: int,
) -> Optional[Tuple[Fraction, Tuple[int, ...]]]:
    """max sum alpha_z w_z, sum alpha = aprime, sum z' alpha <= cap.

    z' rounds z down to a multiple of q = (eps/n) * cap, so the capacity
    splits into exactly n/eps grid steps and the optimum dominates the true
    IP; the returned counts over-use the real capacity by at most a factor
    1+eps.  Solved by dynamic programming over (class, count, grid steps).
    classes are (z, w) pairs; returns (value, counts) or None.
    """
    if aprime == 0:
        return ZERO, tuple(0 for _ in classes)
    if cap < 0:
        return None
    steps = n * eps.inv
    q = cap * eps.value / n  # grid unit; zero only when cap == 0
    units = []
    for z, _ in classes:
        if q == 0:
            units.append(0 if z == 0 else None)  # None: cannot take any
        else:
            units.append(int(z / q))
    # dp[c][u] = best value over exactly c items in u grid steps.  Classes
    # are processed sequentially; reading the same class's entries at lower
    # cardinality realizes unbounded multiplicity.
    dp: List[List[Optional[Fraction]]] = [
        [None] * (steps + 1) for _ in range(aprime + 1)
    ]
    dp[0][0] = ZERO
    take: List[List[Optional[Tuple[int, int, int]]]] = [
        [None] * (steps + 1) for _ in range(aprime + 1)
    ]
    for ci, (_, w) in enumerate(classes):
        uz = units[ci]
        if uz is None or uz > steps:
            continue
        for c in range(1, aprime + 1):
            for u in range(uz, steps + 1):
                prev = dp[c - 1][u - uz]
                if prev is None:
                    continue
                cand = prev + w
                if dp[c][u] is None or cand > dp[c][u]:
                    dp[c][u] = cand
                    take[c][u] = (ci, c - 1, u - uz)
    best: Optional[Tuple[Fraction, int]] = None
    for u in range(steps + 1):
        v = dp[aprime][u]
        if v is not None and (best is None or v > best[0]):
            best = (v, u)
    if best is None:
        return None
    counts = [0] * len(classes)
    c, u = aprime, best[1]
    while c > 0:
        step = take[c][u]
        if step is None:
            raise InternalError("broken DP backtrack")
        ci, c, u = step
        counts[ci] += 1
    return best[0], tuple(counts)


def _true_best(
    classes: Sequence[Tuple[Fraction, Fraction]],
    aprime: int,
    cap: Fraction,
) -> Optional[Tuple[Fraction, Tuple[int, ...]]]:
    """Exact inner IP by depth-first search (fallback and certification)."""
    order = sorted(range(len(classes)), key=lambda i: (-classes[i][1], i))
    best: List[Optional[Tuple[Fraction, Tuple[int, ...]]]] = [None]
    counts = [0] * len(classes)

    def dfs(pos: int, left: int, space: Fraction, value: Fraction) -> None:
        if left == 0:
            if best[0] is None or value > best[0][0]:
                best[0] = (value, tuple(counts))
            return
        if pos == len(order):
            return
        ci = order[pos]
        z, w = classes[ci]
        if best[0] is not None and value + left * max(w, ZERO) <= best[0][0]:
            return
        top = left if z == 0 else min(left, int(space / z)) if space >= 0 else -1
        for c in range(top, -1, -1):
            counts[ci] = c
            dfs(pos + 1, left - c, space - c * z, value + c * w)
        counts[ci] = 0

    dfs(0, aprime, cap, ZERO)
    return best[0]


def price_case2(
    duals: Case2Duals,
    size_classes: Sequence[Tuple[Fraction, int]],
    k: int,
    U: Fraction,
    eps: Eps,
    n: int,
):
    """First configuration whose exact dual value exceeds 1, or NO_COLUMN.

    Guesses (alpha', gamma, gamma', delta) fix everything but the large
    content, reducing the inner problem to the two-constraint IP handled by
    rounded_ip.  A rounded optimum above 1 is re-evaluated exactly; if the
    rounding inflated it, the exact search settles the verdict, so a
    NO_COLUMN answer means no configuration at all is violated.
    """
    sizes = [z for z, _ in size_classes]
    inv = eps.inv
    for gp in (0, 1):
        gammas = (0,) if gp == 0 else tuple(range(inv + 1))
        for gamma in gammas:
            eta = gamma
            nu = duals.nu.get(eta, ZERO)
            xi = duals.xi.get(eta, ZERO)
            rho = duals.rho.get(eta, ZERO)
            zl = gp * (gamma + 1) * eps.value
            classes = [(z, duals.lam.get(z, ZERO) - nu * z) for z in sizes]
            wmax = max((w for _, w in classes), default=ZERO)
            for delta in range(1, max(n, 1) + 1):
                cap = 1 - gp * gamma * eps.value - (delta - 1 + gp) * U
                if cap < 0:
                    break
                const = nu * cap + xi * zl + rho * delta * k
                for aprime in range(0, min(inv, delta * k) + 1):
                    # Cheap upper bound before running the DP.
                    ub = const + aprime * max(wmax, ZERO) - rho * aprime
                    if ub <= 1:
                        continue
                    got = rounded_ip(classes, aprime, cap, eps, n)
                    if got is None:
                        continue
                    value, counts = got
                    if value + const - rho * aprime <= 1:
                        continue
                    cfg = _make_config(sizes, counts, delta, gamma, gp)
                    if _exact_value(cfg, duals, k, U, eps) > 1:
                        return _checked(cfg, k, U, eps)
                    # Rounding inflated the optimum; settle exactly.
                    exact = _true_best(classes, aprime, cap)
                    if exact is not None and exact[0] + const - rho * aprime > 1:
                        cfg = _make_config(sizes, exact[1], delta, gamma, gp)
                        if _exact_value(cfg, duals, k, U, eps) <= 1:
                            raise InternalError("exact pricing disagreement")
                        return _checked(cfg, k, U, eps)
    return NO_COLUMN


def _make_config(sizes, counts, delta, gamma, gp) -> BinConfigII:
    alpha = tuple(
        (sizes[i], counts[i])
        for i in sorted(range(len(sizes)), key=lambda i: -sizes[i])
        if counts[i] > 0
    )
    return BinConfigII(alpha=alpha, delta=delta, gamma=gamma, gamma_prime=gp)


def _exact_value(cfg: BinConfigII, duals: Case2Duals, k: int, U: Fraction, eps: Eps) -> Fraction:
    """LHS of the dual constraint for a bin column, evaluated exactly."""
    ze, zl, zn = cfg.budgets(k, U, eps)
    if ze < 0:
        return Fraction(-1)  # infeasible configuration, never violated
    eta = cfg.gamma
    val = sum((duals.lam.get(z, ZERO) * c for z, c in cfg.alpha), ZERO)
    return (
        val
        + duals.nu.get(eta, ZERO) * ze
        + duals.xi.get(eta, ZERO) * zl
        + duals.rho.get(eta, ZERO) * zn
    )


def _checked(cfg: BinConfigII, k: int, U: Fraction, eps: Eps) -> BinConfigII:
    bad = cfg.violations(k, U, eps)
    if bad:
        raise InternalError("priced invalid configuration: %s" % "; ".join(bad))
    return cfg


@dataclass
class Case2Bin:
    cfg: BinConfigII
    items: List[int]
    late: List[int]  # small items placed against the late budget


def assign_large_case2(
    counters: Dict[BinConfigII, int],
    g: GroupedItems,
    inst: PackingInstance,
) -> List[Case2Bin]:
    """Open ceil(u*) bins per configuration and fill the alpha slots."""
    pool: Dict[Fraction, List[int]] = {}
    for cl in g.classes[1:]:
        for i in cl:
            pool.setdefault(g.rounded[i], []).append(i)
    bins: List[Case2Bin] = []
    for cfg in sorted(counters, key=lambda c: (c.alpha, c.delta, c.gamma, c.gamma_prime)):
        for _ in range(counters[cfg]):
            mine: List[int] = []
            for z, cnt in cfg.alpha:
                take = pool.get(z, [])
                mine.extend(take[:cnt])
                del take[:cnt]
            bins.append(Case2Bin(cfg=cfg, items=mine, late=[]))
    if any(pool.values()):
        raise InternalError("coverage rows left large items unpacked")
    return bins


def small_feas_lp(
    bins: Sequence[Case2Bin],
    small: Sequence[int],
    sizes: Sequence[Fraction],
    k: int,
    U: Fraction,
    eps: Eps,
) -> LPModel:
    """The per-bin disaggregated feasibility system for small items."""
    lp = LPModel()
    for i in small:
        lp.add_row(
            {("v", i, b): 1 for b in range(len(bins))}
            | {("w", i, b): 1 for b in range(len(bins))},
            EQ,
            1,
        )
    for b, cbin in enumerate(bins):
        ze, zl, zn = cbin.cfg.budgets(k, U, eps)
        lp.add_row({("v", i, b): sizes[i] for i in small}, LE, ze)
        lp.add_row({("v", i, b): 1 for i in small}, LE, zn)
        lp.add_row(
            {("w", i, b): modified_size(sizes[i], k, U) for i in small}, LE, zl
        )
    return lp


def assign_small_case2(
    bins: List[Case2Bin],
    small: Sequence[int],
    inst: PackingInstance,
    eps: Eps,
) -> List[List[int]]:
    """Small-item placement, leftovers, and the late-item repair step.

    Returns plain item lists: the delta bins (possibly repaired), dedicated
    leftover bins, and repair merge bins; empty bins are dropped by the
    caller.
    """
    sizes = inst.item_sizes
    k, U = inst.k, inst.U
    leftovers: List[int] = []
    if small:
        if bins:
            sol = basic_feasible(small_feas_lp(bins, small, sizes, k, U, eps))
        else:
            sol = None
        if isinstance(sol, BasicSolution):
            for i in small:
                hits = [
                    (b, var)
                    for b in range(len(bins))
                    for var in (("v", i, b), ("w", i, b))
                    if sol[var] > 0
                ]
                if len(hits) == 1:
                    b, var = hits[0]
                    if sol[var] != 1:
                        raise InternalError("single positive variable not 1")
                    (bins[b].late if var[0] == "w" else bins[b].items).append(i)
                else:
                    leftovers.append(i)
        else:
            # The aggregated budgets do not always disaggregate; fall back
            # to treating every small item as a leftover (see design notes).
            leftovers = list(small)
    out: List[List[int]] = [b.items + b.late for b in bins]

    per_bin = max(1, -(-eps.inv // 2))  # ceil(1/(2 eps))
    for at in range(0, len(leftovers), per_bin):
        group = leftovers[at : at + per_bin]
        out.append(group)
        ordered = sorted((sizes[i] for i in group), reverse=True)
        if bin_load(ordered, k, U) > 1:
            raise InternalError("leftover bin infeasible")

    def plain(items: List[int]) -> Fraction:
        if not items:
            return ZERO
        return bin_load(sorted((sizes[i] for i in items), reverse=True), k, U)

    # Bins whose late budget was used can exceed capacity by up to eps;
    # shed small items, cheapest modified size first, until at least 2 eps
    # of modified size is gone and the plain load fits again.
    shed: List[int] = []
    for b in range(len(bins)):
        if not bins[b].late:
            continue
        queue = sorted(
            (i for i in out[b] if sizes[i] < eps.value),
            key=lambda i: (modified_size(sizes[i], k, U), i),
        )
        total = ZERO
        gone = set()
        for i in queue:
            if total >= 2 * eps.value and plain([j for j in out[b] if j not in gone]) <= 1:
                break
            gone.add(i)
            total += modified_size(sizes[i], k, U)
        out[b] = [j for j in out[b] if j not in gone]
        shed.extend(sorted(gone))
        if plain(out[b]) > 1:
            raise InternalError("repaired bin still overflows")

    # First-fit the shed items into fresh bins, checked exactly; a lone
    # small item always fits, so this cannot fail.
    merged: List[List[int]] = []
    for i in shed:
        for host in merged:
            if plain(host + [i]) <= 1:
                host.append(i)
                break
        else:
            merged.append([i])
    out.extend(merged)
    return out


def solve_master_case2(
    inst: PackingInstance, eps: Eps
) -> Tuple[Case2Master, BasicSolution, GroupedItems, Tuple[int, ...]]:
    """Classify, group the large items, and run the column generation."""
    sizes = inst.item_sizes
    small, large = classify_items(inst, eps)
    order = sorted(large, key=lambda i: (-sizes[i], i))
    g = linear_grouping(order, sizes, eps)
    master = build_master_case2(g, small, sizes, inst.k, inst.U, eps)

    seeds = [BinConfigII(alpha=(), delta=1, gamma=0, gamma_prime=0)]
    for z, _ in g.size_classes:
        seeds.append(BinConfigII(alpha=((z, 1),), delta=1, gamma=0, gamma_prime=0))
    for cfg in seeds:
        var = _config_var(cfg)
        master.model.set_cost(var, ONE)
        for row, coef in _config_coeffs(master, cfg, inst.k, inst.U, eps).items():
            master.model.rows[row][0][var] = coef

    def oracle(raw):
        duals = split_duals(master, raw)
        _check_vw_duals(master, duals, sizes, inst.k, inst.U)
        got = price_case2(duals, g.size_classes, inst.k, inst.U, eps, len(sizes))
        if isinstance(got, BinConfigII):
            return Column(
                var=_config_var(got),
                cost=ONE,
                coeffs=_config_coeffs(master, got, inst.k, inst.U, eps),
            )
        return got

    return master, column_generation(master.model, oracle), g, small


def solve_case2(inst: PackingInstance, eps: Eps) -> Packing:
    """Full case II pipeline; dedicated bins for the first large class."""
    sizes = inst.item_sizes
    _, sol, g, small = solve_master_case2(inst, eps)
    counters: Dict[BinConfigII, int] = {}
    for var in sol.support:
        if isinstance(var, tuple) and var and var[0] == "bin":
            x = sol[var]
            counters[var[1]] = counters.get(var[1], 0) + -(-x.numerator // x.denominator)
    bins = assign_large_case2(counters, g, inst)
    lists = assign_small_case2(bins, small, inst, eps)
    for i in g.class1:
        lists.append([i])
    return Packing(
        bins=tuple(
            tuple(sorted(b, key=lambda i: (-sizes[i], i))) for b in lists if b
        )
    )


def _check_vw_duals(master, duals: Case2Duals, sizes, k: int, U: Fraction) -> None:
    """Closed-form check of the v/w dual rows; they must hold at optimum."""
    for i in master.small:
        mu = duals.mu.get(i, ZERO)
        for eta in master.row_esize:
            if mu - sizes[i] * duals.nu[eta] - duals.rho[eta] > 0:
                raise InternalError("dual row for early item %d violated" % i)
            if mu - modified_size(sizes[i], k, U) * duals.xi[eta] > 0:
                raise InternalError("dual row for late item %d violated" % i)
