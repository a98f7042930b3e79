"""Case I (kmax <= 1/eps^2): covering LP over fully grouped items.

Every item lands in the grouping, so a bin is described completely by how
many rounded items of each size class it holds; the idle-item count is a
function of the cardinality.  The LP min sum x_c s.t. sum_c alpha_cz x_c >=
n(z) is solved by column generation, priced per guessed cardinality as an
exact cardinality-constrained knapsack, and the basic optimum is rounded up
on its support.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .bpu import GroupedItems, linear_grouping
from .lp import GE, BasicSolution, Column, LPModel, NO_COLUMN, column_generation
from .model import InternalError, Packing, PackingInstance, kmax

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class BinConfigI:
    """A bin's content by rounded size, with the implied idle-item count."""

    alpha: Tuple[Tuple[Fraction, int], ...]  # ((size, count), ...) descending
    delta: int

    @property
    def cardinality(self) -> int:
        return sum(c for _, c in self.alpha)

    def violations(self, k: int, U: Fraction, cap: int) -> List[str]:
        out = []
        total = self.cardinality
        if total < 1:
            out.append("empty configuration")
            return out
        if self.delta != (total - 1) // k:
            out.append("delta %d != floor((%d-1)/%d)" % (self.delta, total, k))
        load = sum((s * c for s, c in self.alpha), ZERO) + self.delta * U
        if load > 1:
            out.append("load %s > 1" % (load,))
        if total > cap:
            out.append("cardinality %d > kmax %d" % (total, cap))
        return out


def build_master_case1(g: GroupedItems, k: int, U: Fraction) -> LPModel:
    """Covering rows >= n(z) per size class; columns arrive from pricing."""
    lp = LPModel()
    lp.sense = "min"
    for z, count in g.size_classes:
        lp.add_row({}, GE, count)
    return lp


def price_case1(
    duals: Sequence[Fraction],
    size_classes: Sequence[Tuple[Fraction, int]],
    k: int,
    U: Fraction,
):
    """Most violated bin over all cardinality guesses, or NO_COLUMN.

    For each alpha' up to min(n, kmax) the inner problem max sum alpha_z y_z
    with sum alpha_z = alpha' and sum z alpha_z <= 1 - U(ceil(alpha'/k)-1)
    is solved exactly by depth-first search over class counts, so NO_COLUMN
    certifies that no bin at all has dual value above 1 (tighter than the
    1+eps the asymptotic argument needs).
    """
    nclasses = len(size_classes)
    n = sum(c for _, c in size_classes)
    cap_items = min(n, kmax(k, U))
    order = sorted(range(nclasses), key=lambda i: (-duals[i], i))
    best_col: Optional[Tuple[Fraction, Tuple[int, ...]]] = None
    for aprime in range(1, cap_items + 1):
        room = 1 - U * (-(-aprime // k) - 1)
        if room < 0:
            continue
        best: List[Optional[Tuple[Fraction, Tuple[int, ...]]]] = [None]
        counts = [0] * nclasses

        def dfs(pos: int, left: int, space: Fraction, value: Fraction) -> None:
            if left == 0:
                if best[0] is None or value > best[0][0]:
                    best[0] = (value, tuple(counts))
                return
            if pos == nclasses:
                return
            zi = order[pos]
            y = duals[zi]
            if best[0] is not None and value + left * y <= best[0][0]:
                return  # duals are sorted, no later class pays more
            z = size_classes[zi][0]
            top = left if z == 0 else min(left, int(space / z))
            for c in range(top, -1, -1):
                counts[zi] = c
                dfs(pos + 1, left - c, space - c * z, value + c * y)
            counts[zi] = 0

        dfs(0, aprime, room, ZERO)
        if best[0] is None:
            continue
        value, alpha_counts = best[0]
        if value > 1:
            alpha = tuple(
                (size_classes[i][0], alpha_counts[i])
                for i in sorted(range(nclasses), key=lambda i: -size_classes[i][0])
                if alpha_counts[i] > 0
            )
            cfg = BinConfigI(alpha=alpha, delta=(aprime - 1) // k)
            bad = cfg.violations(k, U, kmax(k, U))
            if bad:
                raise InternalError("priced an invalid bin: %s" % "; ".join(bad))
            coeffs = {i: Fraction(alpha_counts[i]) for i in range(nclasses) if alpha_counts[i]}
            return Column(var=("bin", cfg), cost=ONE, coeffs=coeffs)
    return NO_COLUMN


def pack_case1(
    counters: Dict[BinConfigI, int],
    g: GroupedItems,
    inst: PackingInstance,
) -> Packing:
    """Fill configuration copies greedily by descending size, then class 1."""
    pool: Dict[Fraction, List[int]] = {}
    for cl in g.classes[1:]:
        for i in cl:
            pool.setdefault(g.rounded[i], []).append(i)
    bins: List[List[int]] = []
    for cfg in sorted(counters, key=lambda c: (c.alpha, c.delta)):
        for _ in range(counters[cfg]):
            mine: List[int] = []
            for z, cnt in cfg.alpha:
                take = pool.get(z, [])
                got = take[:cnt]
                del take[:cnt]
                mine.extend(got)
            if mine:
                bins.append(mine)
    if any(pool.values()):
        raise InternalError("coverage rows left items unpacked")
    for i in g.class1:
        bins.append([i])
    return Packing(
        bins=tuple(
            tuple(sorted(b, key=lambda i: (-inst.item_sizes[i], i))) for b in bins
        )
    )


def solve_case1(inst: PackingInstance, eps) -> Packing:
    """Group everything, generate bin columns, round up on the support."""
    order = sorted(range(len(inst.item_sizes)), key=lambda i: (-inst.item_sizes[i], i))
    g = linear_grouping(order, inst.item_sizes, eps)
    if not g.size_classes:
        return pack_case1({}, g, inst)
    master = build_master_case1(g, inst.k, inst.U)
    # Singleton columns make the restricted master feasible from the start.
    for zi, (z, _) in enumerate(g.size_classes):
        var = ("bin", BinConfigI(alpha=((z, 1),), delta=0))
        master.set_cost(var, ONE)
        master.rows[zi][0][var] = ONE

    def oracle(duals):
        return price_case1(duals, g.size_classes, inst.k, inst.U)

    sol = column_generation(master, oracle)
    counters: Dict[BinConfigI, int] = {}
    for var in sol.support:
        x = sol[var]
        counters[var[1]] = counters.get(var[1], 0) + -(-x.numerator // x.denominator)
    return pack_case1(counters, g, inst)
