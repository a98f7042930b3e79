"""Case I: covering master, knapsack pricing, round-up packing."""

import itertools
import random
from fractions import Fraction as F

from idlepack.bpu import Case, choose_case, linear_grouping
from idlepack.bpu_case1 import (
    BinConfigI,
    build_master_case1,
    pack_case1,
    price_case1,
    solve_case1,
)
from idlepack.lp import NO_COLUMN, Column, solve_lp
from idlepack.model import Eps, PackingInstance, kmax, verify_packing
from idlepack.oracle import exact_bincount

ZERO = F(0)


def brute_configs(size_classes, k, U, cap):
    """Every feasible BinConfigI, by direct enumeration."""
    out = []
    ranges = [range(cap + 1) for _ in size_classes]
    for counts in itertools.product(*ranges):
        total = sum(counts)
        if not 1 <= total <= cap:
            continue
        delta = (total - 1) // k
        load = sum((z * c for (z, _), c in zip(size_classes, counts)), ZERO)
        if load + delta * U > 1:
            continue
        alpha = tuple(
            (z, c) for (z, _), c in zip(size_classes, counts) if c
        )
        out.append(BinConfigI(alpha=alpha, delta=delta))
    return out


def solve_with_all_columns(g, k, U, cap):
    """Reference solver: enumerate every column up front, solve one LP."""
    master = build_master_case1(g, k, U)
    index = {z: zi for zi, (z, _) in enumerate(g.size_classes)}
    for cfg in brute_configs(g.size_classes, k, U, cap):
        var = ("bin", cfg)
        master.set_cost(var, F(1))
        for z, c in cfg.alpha:
            master.rows[index[z]][0][var] = F(c)
    return solve_lp(master)


def grouped(sizes, eps):
    order = sorted(range(len(sizes)), key=lambda i: (-sizes[i], i))
    return linear_grouping(order, sizes, eps)


class TestMaster:
    def test_unit_items_need_own_bins(self):
        g = grouped([F(1)] * 5, Eps(F(1, 2)))
        sol = solve_with_all_columns(g, 1, F(1, 2), kmax(1, F(1, 2)))
        # class 1 holds ceil(5/8) = 1 item, leaving 4 to cover.
        assert sol.objective == 4

    def test_two_halves_per_bin(self):
        sizes = [F(1, 2)] * 4
        g = grouped(sizes, Eps(F(1, 2)))
        sol = solve_with_all_columns(g, 2, F(1, 2), kmax(2, F(1, 2)))
        # k=2 allows two items without an idle item: load exactly 1.
        assert sol.objective == F(3, 2)  # 3 grouped items, 2 per bin

    def test_four_halves_direct_master(self):
        # The same size class fed to the master directly (no grouping):
        # two items per bin at load exactly 1, so the covering LP needs 2.
        from idlepack.bpu import GroupedItems

        g = GroupedItems(
            classes=((), (0, 1, 2, 3)),
            class1=(),
            rounded={i: F(1, 2) for i in range(4)},
            size_classes=((F(1, 2), 4),),
        )
        sol = solve_with_all_columns(g, 2, F(1, 2), kmax(2, F(1, 2)))
        assert sol.objective == 2

    def test_no_items(self):
        g = grouped([], Eps(F(1, 2)))
        master = build_master_case1(g, 1, F(1))
        assert solve_lp(master).objective == 0


class TestPricing:
    SC = ((F(1, 2), 4),)

    def test_zero_duals_certify(self):
        assert price_case1([ZERO], self.SC, 2, F(1, 2)) is NO_COLUMN

    def test_violated_pair_column(self):
        col = price_case1([F(3, 5)], self.SC, 2, F(1, 2))
        assert isinstance(col, Column)
        cfg = col.var[1]
        assert cfg.alpha == ((F(1, 2), 2),) and cfg.delta == 0
        assert col.coeffs == {0: 2}

    def test_weak_duals_certify(self):
        assert price_case1([F(2, 5)], self.SC, 2, F(1, 2)) is NO_COLUMN

    def test_verdict_matches_brute_force(self):
        rng = random.Random(9)
        for _ in range(40):
            k = rng.randint(1, 3)
            U = F(rng.randint(1, 4), 4)
            nclass = rng.randint(1, 3)
            sc = tuple(
                (F(rng.randint(1, 8), 8), rng.randint(1, 5)) for _ in range(nclass)
            )
            sc = tuple(sorted(set(sc), key=lambda t: -t[0]))
            duals = [F(rng.randint(0, 12), 10) for _ in sc]
            col = price_case1(duals, sc, k, U)
            index = {z: zi for zi, (z, _) in enumerate(sc)}
            cap = min(sum(c for _, c in sc), kmax(k, U))
            best = ZERO
            for cfg in brute_configs(sc, k, U, cap):
                val = sum((duals[index[z]] * c for z, c in cfg.alpha), ZERO)
                best = max(best, val)
            if best > 1:
                assert isinstance(col, Column)
            else:
                assert col is NO_COLUMN


class TestPack:
    def test_integral_solution_realized_exactly(self):
        sizes = [F(1, 2)] * 4
        eps = Eps(F(1, 2))
        g = grouped(sizes, eps)
        cfg = BinConfigI(alpha=((F(1, 2), 2),), delta=0)
        pack = pack_case1({cfg: 2}, g, PackingInstance(sizes, 2, F(1, 2)))
        sizes_per_bin = sorted(len(b) for b in pack.bins)
        assert sizes_per_bin in ([1, 1, 2], [1, 2, 1], [2, 1, 1], [1, 2, 2])

    def test_five_unit_items(self):
        inst = PackingInstance([F(1)] * 5, 1, F(1, 2))
        eps = Eps(F(1, 2))
        assert choose_case(inst.k, inst.U, eps) is Case.I
        pack = solve_case1(inst, eps)
        assert len(pack.bins) == 5
        assert verify_packing(inst, pack) == []


class TestGuarantee:
    def test_lp_at_most_rounded_opt(self):
        rng = random.Random(17)
        eps = Eps(F(1, 2))
        for _ in range(30):
            n = rng.randint(2, 8)
            k = rng.randint(1, 3)
            U = F(rng.randint(1, 4), 4)
            if choose_case(k, U, eps) is not Case.I:
                continue
            sizes = [F(rng.randint(0, 8), 8) for _ in range(n)]
            g = grouped(sizes, eps)
            if not g.size_classes:
                continue
            sol = solve_with_all_columns(g, k, U, kmax(k, U))
            rounded = [g.rounded[i] for c in g.classes[1:] for i in c]
            if not rounded:
                continue
            opt_rounded, _ = exact_bincount(PackingInstance(rounded, k, U))
            assert sol.objective <= opt_rounded

    def test_final_bound_against_oracle(self):
        rng = random.Random(23)
        checked = 0
        for _ in range(400):
            if checked >= 40:
                break
            n = rng.randint(1, 9)
            k = rng.randint(1, 4)
            U = F(rng.randint(1, 8), 8)
            ev = rng.choice([F(1, 2), F(1, 3)])
            eps = Eps(ev)
            if choose_case(k, U, eps) is not Case.I:
                continue
            sizes = [F(rng.randint(0, 12), 12) for _ in range(n)]
            inst = PackingInstance(sizes, k, U)
            checked += 1
            pack = solve_case1(inst, eps)
            assert verify_packing(inst, pack) == []
            opt, _ = exact_bincount(inst)
            assert len(pack.bins) <= (1 + 2 * ev) * opt + eps.inv**3
        assert checked >= 40
