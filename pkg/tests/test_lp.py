"""Simplex and column generation against exhaustive vertex enumeration.

The enumeration oracle here converts a model to standard form and tries every
basis subset with exact Gaussian elimination — an independent, brute-force
path to the optimum for LPs with a handful of variables.
"""

import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from idlepack.lp import (
    EQ,
    GE,
    LE,
    BasicSolution,
    Column,
    Infeasible,
    LPModel,
    NO_COLUMN,
    Simplex,
    Unbounded,
    basic_feasible,
    check_solution,
    column_generation,
    solve_lp,
)

F = Fraction


def solve_columns(cols, b):
    """Solve sum_j x_j * cols[j] = b with independent columns; None otherwise.

    Returns the unique x when the columns are linearly independent and the
    system is consistent — exactly the vertex candidates of standard form.
    """
    m = len(b)
    n = len(cols)
    M = [[cols[c][r] for c in range(n)] + [b[r]] for r in range(m)]
    pivots = []
    row = 0
    for col in range(n):
        p = next((r for r in range(row, m) if M[r][col] != 0), None)
        if p is None:
            return None  # dependent column set: not a basis
        M[row], M[p] = M[p], M[row]
        inv = F(1) / M[row][col]
        M[row] = [a * inv for a in M[row]]
        for r in range(m):
            if r != row and M[r][col]:
                f = M[r][col]
                M[r] = [a - f * c2 for a, c2 in zip(M[r], M[row])]
        pivots.append(col)
        row += 1
    for r in range(row, m):
        if M[r][n] != 0:
            return None  # inconsistent
    x = [F(0)] * n
    for i, col in enumerate(pivots):
        x[col] = M[i][n]
    return x


def enumerate_optimum(model):
    """Brute-force optimum over all column subsets of size <= rows.

    None when infeasible.  Only sound for models with a bounded feasible
    region (callers add box rows), where some vertex attains the optimum.
    """
    varnames = model.variables
    ncols = len(varnames) + sum(1 for (_, rel, _) in model.rows if rel != EQ)
    nrows = len(model.rows)
    A = [[F(0)] * ncols for _ in range(nrows)]
    b = []
    scol = len(varnames)
    for r, (coeffs, rel, rhs) in enumerate(model.rows):
        for v, a in coeffs.items():
            A[r][varnames.index(v)] = a
        if rel != EQ:
            A[r][scol] = F(1) if rel == LE else F(-1)
            scol += 1
        b.append(rhs)
    cost = [model.objective.get(v, F(0)) for v in varnames] + [F(0)] * (ncols - len(varnames))
    best = None
    for size in range(nrows + 1):
        for subset in itertools.combinations(range(ncols), size):
            sub = [[A[r][c] for r in range(nrows)] for c in subset]
            x = solve_columns(sub, b)
            if x is None or any(v < 0 for v in x):
                continue
            obj = sum(cost[c] * x[i] for i, c in enumerate(subset))
            if best is None:
                best = obj
            elif model.sense == "min":
                best = min(best, obj)
            else:
                best = max(best, obj)
    return best


def test_min_x_geq_3():
    m = LPModel(sense="min", objective={"x": F(1)})
    m.add_row({"x": 1}, GE, 3)
    sol = solve_lp(m)
    assert isinstance(sol, BasicSolution)
    assert sol["x"] == 3 and sol.objective == 3
    assert check_solution(m, sol) == []


def test_basicness_on_shared_cover():
    m = LPModel(sense="min", objective={"x1": F(1), "x2": F(1)})
    m.add_row({"x1": 1, "x2": 1}, GE, 1)
    sol = solve_lp(m)
    assert sol.objective == 1
    assert len(sol.support) <= 1


def test_unbounded_max():
    m = LPModel(sense="max", objective={"x": F(1)})
    assert isinstance(solve_lp(m), Unbounded)


def test_basic_feasible_examples():
    m = LPModel()
    m.add_row({"x": 1}, EQ, 1)
    sol = basic_feasible(m)
    assert sol["x"] == 1
    m2 = LPModel()
    m2.add_row({"x": 1}, GE, 1)
    m2.add_row({"x": 1}, LE, 0)
    assert isinstance(basic_feasible(m2), Infeasible)


def test_assignment_polytope_vertex_is_integral():
    # 3 items x 2 bins with ample capacity: a totally unimodular system, so
    # every vertex is 0/1; phase one must land on one of them.
    m = LPModel()
    for i in range(3):
        m.add_row({("x", i, b): 1 for b in range(2)}, EQ, 1)
    for b in range(2):
        m.add_row({("x", i, b): 1 for i in range(3)}, LE, 2)
    sol = basic_feasible(m)
    assert isinstance(sol, BasicSolution)
    assert len(sol.support) <= len(m.rows)
    assert all(x in (0, 1) for x in sol.values.values())
    assert check_solution(m, sol) == []


def test_duals_satisfy_strong_duality():
    # min 3x + 2y st x+y >= 2, x - y <= 1  ->  duals reproduce the objective.
    m = LPModel(sense="min", objective={"x": F(3), "y": F(2)})
    m.add_row({"x": 1, "y": 1}, GE, 2)
    m.add_row({"x": 1, "y": -1}, LE, 1)
    sol = solve_lp(m)
    assert isinstance(sol, BasicSolution)
    ydotb = sum(y * rhs for y, (_, _, rhs) in zip(sol.duals, m.rows))
    assert ydotb == sol.objective
    # dual feasibility: c_j - y.a_j >= 0 on every column of a min model
    for v in m.variables:
        red = m.objective.get(v, F(0)) - sum(
            y * coeffs.get(v, F(0)) for y, (coeffs, _, _) in zip(sol.duals, m.rows)
        )
        assert red >= 0


rows_st = st.lists(
    st.tuples(
        st.lists(st.integers(-3, 3), min_size=3, max_size=3),
        st.sampled_from([LE, GE, EQ]),
        st.integers(-4, 6),
    ),
    min_size=1,
    max_size=3,
)


@settings(max_examples=60, deadline=None)
@given(rows_st, st.lists(st.integers(-3, 3), min_size=3, max_size=3))
def test_solve_lp_matches_enumeration(rows, cost):
    m = LPModel(sense="min", objective={i: F(c) for i, c in enumerate(cost)})
    for coeffs, rel, rhs in rows:
        m.add_row({i: a for i, a in enumerate(coeffs) if a}, rel, rhs)
    for i in range(3):
        m.add_row({i: 1}, LE, 5)  # box: keeps the region bounded
    res = solve_lp(m)
    ref = enumerate_optimum(m)
    if ref is None:
        assert isinstance(res, Infeasible)
    else:
        assert isinstance(res, BasicSolution)
        assert res.objective == ref
        assert check_solution(m, res) == []
        ydotb = sum(y * rhs for y, (_, _, rhs) in zip(res.duals, m.rows))
        assert ydotb == res.objective


def _cover_oracle(all_cols, model):
    """Exact pricing over an explicit column pool (unit cost covering LPs)."""

    def oracle(duals):
        for name, coeffs in all_cols:
            if name in model.objective:
                continue
            val = sum(duals[r] * a for r, a in coeffs.items())
            if val > 1:
                return Column(var=name, cost=F(1), coeffs=coeffs)
        return NO_COLUMN

    return oracle


def test_column_generation_cutting_stock_toy():
    # sizes {1/2, 1/3} with demands {2, 3}; bins hold any multiset of total
    # size <= 1 (k large).  Full LP optimum = 2: one {1/2,1/2} bin and one
    # {1/3,1/3,1/3} bin.
    cols = []
    for a in range(3):
        for b in range(4):
            if (a, b) != (0, 0) and F(a, 2) + F(b, 3) <= 1:
                cols.append((("col", a, b), {0: F(a), 1: F(b)}))
    full = LPModel(sense="min", objective={name: F(1) for name, _ in cols})
    full.add_row({name: c[0] for name, c in cols}, GE, 2)
    full.add_row({name: c[1] for name, c in cols}, GE, 3)
    ref = solve_lp(full)

    restricted = LPModel(sense="min", objective={})
    singles = [
        next(c for c in cols if c[0] == ("col", 2, 0)),
        next(c for c in cols if c[0] == ("col", 0, 3)),
    ]
    r0 = {name: c.get(0, F(0)) for name, c in singles}
    r1 = {name: c.get(1, F(0)) for name, c in singles}
    for name, _ in singles:
        restricted.set_cost(name, F(1))
    restricted.add_row(r0, GE, 2)
    restricted.add_row(r1, GE, 3)
    sol = column_generation(restricted, _cover_oracle(cols, restricted))
    assert sol.objective == ref.objective == 2
    # exact oracle -> final duals feasible for every column at threshold 1
    for name, coeffs in cols:
        assert sum(sol.duals[r] * a for r, a in coeffs.items()) <= 1


def test_column_generation_trivial_cases():
    # full column set present: oracle immediately certifies optimality
    m = LPModel(sense="min", objective={"a": F(1)})
    m.add_row({"a": 1}, GE, 5)
    sol = column_generation(m, lambda duals: NO_COLUMN)
    assert sol.objective == 5


@settings(max_examples=30, deadline=None)
@given(
    st.integers(2, 4),
    st.lists(st.integers(1, 5), min_size=2, max_size=4),
    st.integers(0, 10 ** 6),
)
def test_column_generation_matches_full_lp(nsizes, demands, seed):
    """Random covering LPs: CG with an exact pool oracle equals the full LP."""
    import random

    rng = random.Random(seed)
    demands = demands[:nsizes]
    nsizes = len(demands)
    pool = []
    for t in range(6):
        coeffs = {r: F(rng.randint(0, 3)) for r in range(nsizes)}
        coeffs = {r: a for r, a in coeffs.items() if a}
        if coeffs:
            pool.append((("c", t), coeffs))
    for r in range(nsizes):
        pool.append((("single", r), {r: F(1)}))
    full = LPModel(sense="min", objective={name: F(1) for name, _ in pool})
    for r in range(nsizes):
        full.add_row({name: c.get(r, F(0)) for name, c in pool}, GE, demands[r])
    ref = solve_lp(full)
    assert isinstance(ref, BasicSolution)

    restricted = LPModel(sense="min", objective={})
    for r in range(nsizes):
        restricted.set_cost(("single", r), F(1))
    for r in range(nsizes):
        restricted.add_row({("single", r): F(1)}, GE, demands[r])
    sol = column_generation(restricted, _cover_oracle(pool, restricted))
    assert sol.objective == ref.objective
    assert len(sol.support) <= len(restricted.rows)
