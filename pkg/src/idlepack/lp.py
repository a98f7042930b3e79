"""Exact-rational linear programming and the column-generation driver.

Dense two-phase tableau simplex over `fractions.Fraction`.  One artificial
variable is kept per row, so B^-1 always sits in the artificial block and the
dual values fall out of the final cost row.  Pivoting uses Dantzig's rule
with an automatic switch to Bland's rule after a stall, which keeps the exact
termination guarantee without paying Bland's pivot count on every solve.

Desk scale only: masters here stay within a few hundred rows.  No floats.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Hashable, List, Optional, Tuple, Union

from .model import InternalError, rat

Var = Hashable
ZERO = Fraction(0)
ONE = Fraction(1)

LE, GE, EQ = "<=", ">=", "="


@dataclass
class LPModel:
    """Mutable LP builder: min/max c.x subject to rows, all variables >= 0."""

    sense: str = "min"
    objective: Dict[Var, Fraction] = field(default_factory=dict)
    rows: List[Tuple[Dict[Var, Fraction], str, Fraction]] = field(default_factory=list)

    def __post_init__(self):
        if self.sense not in ("min", "max"):
            raise ValueError("sense must be 'min' or 'max'")
        self._var_order: List[Var] = []
        self._var_seen = set()
        for v in self.objective:
            self._note(v)
        self.objective = {v: rat(c) for v, c in self.objective.items()}
        for coeffs, _, _ in self.rows:
            for v in coeffs:
                self._note(v)

    def _note(self, v: Var) -> None:
        if v not in self._var_seen:
            self._var_seen.add(v)
            self._var_order.append(v)

    def set_cost(self, v: Var, c) -> None:
        self.objective[v] = rat(c)
        self._note(v)

    def add_row(self, coeffs: Dict[Var, object], rel: str, rhs) -> int:
        if rel not in (LE, GE, EQ):
            raise ValueError("relation must be one of <=, >=, =")
        row = {v: rat(c) for v, c in coeffs.items() if rat(c) != 0}
        for v in row:
            self._note(v)
        self.rows.append((row, rel, rat(rhs)))
        return len(self.rows) - 1

    @property
    def variables(self) -> List[Var]:
        return list(self._var_order)


@dataclass(frozen=True)
class BasicSolution:
    """An LP vertex: values, basis, objective, and per-row duals.

    Invariant (asserted at construction): the number of strictly positive
    structural variables never exceeds the number of rows.  The rounding
    arguments of both packing cases ride on exactly this count.
    """

    values: Dict[Var, Fraction]
    basis: Tuple[Var, ...]
    objective: Fraction
    duals: Optional[Tuple[Fraction, ...]]
    n_rows: int

    def __post_init__(self):
        support = sum(1 for x in self.values.values() if x > 0)
        if support > self.n_rows:
            raise InternalError(
                "basic solution with %d positive variables on %d rows" % (support, self.n_rows)
            )

    def __getitem__(self, v: Var) -> Fraction:
        return self.values.get(v, ZERO)

    @property
    def support(self) -> List[Var]:
        return [v for v, x in self.values.items() if x > 0]


@dataclass(frozen=True)
class Infeasible:
    """Certified: phase one ended with positive artificial mass."""

    phase1_objective: Fraction


@dataclass(frozen=True)
class Unbounded:
    """Certified: an improving ray was found on the named entering variable."""

    var: Var


LPResult = Union[BasicSolution, Infeasible, Unbounded]


class Simplex:
    """Working tableau for one model; supports warm-started column addition.

    Internal standard form: min c.x, Ax = b, x >= 0, b >= 0.  Column layout
    is [artificials | slacks | structurals]; artificials never re-enter, so
    the artificial block carries B^-1 throughout.
    """

    _PIVOT_LIMIT = 400_000

    def __init__(self, model: LPModel):
        self.model = model
        self.nrows = m = len(model.rows)
        self.sense_flip = -1 if model.sense == "max" else 1
        self.row_negated = [False] * m
        nslack = sum(1 for (_, rel, _) in model.rows if rel != EQ)
        width = m + nslack + len(model.variables)

        self.rows: List[List[Fraction]] = [[ZERO] * width for _ in range(m)]
        self.b: List[Fraction] = [ZERO] * m
        self.cost1: List[Fraction] = [ZERO] * width  # phase-1 reduced costs
        self.cost2: List[Fraction] = [ZERO] * width  # phase-2 reduced costs
        self.c2: List[Fraction] = [ZERO] * width  # raw internal cost per column
        self.obj1 = ZERO  # equals -(current artificial mass)
        self.obj2 = ZERO  # equals -(current internal objective)
        self.basis: List[int] = list(range(m))
        self.dead_rows: set = set()
        self.enterable_from = m
        self.col_of: Dict[Var, int] = {}
        self.pivots = 0

        scol = m
        for r, (coeffs, rel, rhs) in enumerate(model.rows):
            self.rows[r][r] = ONE  # artificial identity block == B^-1
            neg = rhs < 0
            self.row_negated[r] = neg
            sgn = -1 if neg else 1
            self.b[r] = rhs * sgn
            if rel != EQ:
                self.rows[r][scol] = Fraction(sgn if rel == LE else -sgn)
                scol += 1
        for j, v in enumerate(model.variables):
            c = m + nslack + j
            self.col_of[v] = c
            self.c2[c] = model.objective.get(v, ZERO) * self.sense_flip
            self.cost2[c] = self.c2[c]
        for r, (coeffs, _, _) in enumerate(model.rows):
            sgn = -1 if self.row_negated[r] else 1
            for v, a in coeffs.items():
                self.rows[r][self.col_of[v]] = a * sgn
        # Reduced costs for the all-artificial basis: subtract each row from
        # the phase-1 cost row; the initial objective is -(sum of b).
        for r in range(m):
            row = self.rows[r]
            for c in range(m, width):
                if row[c]:
                    self.cost1[c] -= row[c]
            self.obj1 -= self.b[r]

    # -- pivoting ---------------------------------------------------------

    def _pivot(self, r: int, c: int) -> None:
        self.pivots += 1
        if self.pivots > self._PIVOT_LIMIT:
            raise InternalError("pivot limit exhausted; cycling guard failed")
        row = self.rows[r]
        piv = row[c]
        if piv != 1:
            inv = ONE / piv
            self.rows[r] = row = [a * inv if a else a for a in row]
            self.b[r] *= inv
        br = self.b[r]
        for rr in range(self.nrows):
            if rr == r:
                continue
            f = self.rows[rr][c]
            if f:
                tgt = self.rows[rr]
                self.rows[rr] = [t - f * a if a else t for t, a in zip(tgt, row)]
                self.b[rr] -= f * br
        f = self.cost1[c]
        if f:
            self.cost1 = [t - f * a if a else t for t, a in zip(self.cost1, row)]
            self.obj1 -= f * br
        f = self.cost2[c]
        if f:
            self.cost2 = [t - f * a if a else t for t, a in zip(self.cost2, row)]
            self.obj2 -= f * br
        self.basis[r] = c

    def _ratio_row(self, c: int) -> Optional[int]:
        best_r, best_ratio, best_key = None, None, None
        for r in range(self.nrows):
            if r in self.dead_rows:
                continue
            a = self.rows[r][c]
            if a > 0:
                ratio = self.b[r] / a
                key = self.basis[r]
                if best_ratio is None or ratio < best_ratio or (
                    ratio == best_ratio and key < best_key
                ):
                    best_r, best_ratio, best_key = r, ratio, key
        return best_r

    def _optimize(self, phase: int) -> Optional[int]:
        """Pivot to optimality of the phase cost; returns entering column on a ray."""
        stall, bland = 0, False
        last_obj = self.obj1 if phase == 1 else self.obj2
        while True:
            if phase == 1 and self.obj1 == 0:
                return None
            cost = self.cost1 if phase == 1 else self.cost2
            width = len(cost)
            enter = None
            if bland:
                for c in range(self.enterable_from, width):
                    if cost[c] < 0:
                        enter = c
                        break
            else:
                best = ZERO
                for c in range(self.enterable_from, width):
                    rc = cost[c]
                    if rc < best:
                        best, enter = rc, c
            if enter is None:
                return None
            r = self._ratio_row(enter)
            if r is None:
                return enter
            self._pivot(r, enter)
            obj = self.obj1 if phase == 1 else self.obj2
            if obj == last_obj:
                stall += 1
                if stall > self.nrows + 16:
                    bland = True
            else:
                stall, bland, last_obj = 0, False, obj

    def phase1(self) -> bool:
        """Drive artificial mass to zero; False means certified infeasible."""
        ray = self._optimize(phase=1)
        if ray is not None:
            raise InternalError("phase one cannot be unbounded")
        if self.obj1 != 0:
            return False
        for r in range(self.nrows):
            if self.basis[r] < self.nrows and r not in self.dead_rows:
                row = self.rows[r]
                c = next((c for c in range(self.enterable_from, len(row)) if row[c]), None)
                if c is None:
                    self.dead_rows.add(r)  # redundant constraint; dual 0
                else:
                    self._pivot(r, c)  # degenerate exchange, b[r] == 0
        return True

    def phase2(self) -> Optional[Unbounded]:
        ray = self._optimize(phase=2)
        if ray is None:
            return None
        name = next((v for v, c in self.col_of.items() if c == ray), "slack")
        return Unbounded(name)

    # -- warm-started column addition ------------------------------------

    def add_column(self, var: Var, cost, coeffs: Dict[int, object]) -> None:
        """Append a structural column (coeffs keyed by original row index).

        If the column touches a row previously retired as redundant, the row
        is revived and a (degenerate, cheap) phase-1 cleanup is rerun.
        """
        if var in self.col_of:
            raise InternalError("duplicate column %r" % (var,))
        dense = [ZERO] * self.nrows
        for r, a in coeffs.items():
            dense[r] = rat(a) * (-1 if self.row_negated[r] else 1)
        newcol = []
        for r in range(self.nrows):
            arow = self.rows[r]
            acc = ZERO
            for i, ai in enumerate(dense):
                if ai:
                    acc += arow[i] * ai
            newcol.append(acc)  # B^-1 a, read off the artificial block
        c_int = rat(cost) * self.sense_flip
        rc1, rc2 = ZERO, c_int
        for r in range(self.nrows):
            a = newcol[r]
            if not a:
                continue
            if self.basis[r] < self.nrows:
                rc1 -= a
            cb = self.c2[self.basis[r]]
            if cb:
                rc2 -= cb * a
        for r in range(self.nrows):
            self.rows[r].append(newcol[r])
        self.cost1.append(rc1)
        self.cost2.append(rc2)
        self.c2.append(c_int)
        self.col_of[var] = len(self.c2) - 1
        self.model.set_cost(var, rat(cost))
        for r, a in coeffs.items():
            self.model.rows[r][0][var] = rat(a)
        revived = [r for r in self.dead_rows if dense[r] or newcol[r]]
        if revived:
            self.dead_rows.difference_update(revived)
            if not self.phase1():
                raise InternalError("revived rows made the master infeasible")

    # -- extraction -------------------------------------------------------

    def solution(self, with_duals: bool = True) -> BasicSolution:
        names = {c: v for v, c in self.col_of.items()}
        values: Dict[Var, Fraction] = {}
        basis_vars = []
        for r in range(self.nrows):
            if r in self.dead_rows:
                continue
            v = names.get(self.basis[r])
            if v is not None:
                values[v] = self.b[r]
                basis_vars.append(v)
        obj = sum(
            (self.model.objective.get(v, ZERO) * x for v, x in values.items()), ZERO
        )
        duals = None
        if with_duals:
            ys = []
            for r in range(self.nrows):
                if r in self.dead_rows:
                    ys.append(ZERO)
                    continue
                y = -self.cost2[r]  # cost2[artificial r] = 0 - y_r
                if self.row_negated[r]:
                    y = -y
                ys.append(y * self.sense_flip)
            duals = tuple(ys)
        return BasicSolution(
            values=values,
            basis=tuple(basis_vars),
            objective=obj,
            duals=duals,
            n_rows=len(self.model.rows),
        )


def solve_lp(model: LPModel) -> LPResult:
    """Optimal basic solution in exact rationals, or Infeasible/Unbounded."""
    sx = Simplex(model)
    if not sx.phase1():
        return Infeasible(phase1_objective=-sx.obj1)
    ub = sx.phase2()
    if ub is not None:
        return ub
    return sx.solution()


def basic_feasible(model: LPModel) -> Union[BasicSolution, Infeasible]:
    """Phase one only: any basic feasible point (duals omitted)."""
    sx = Simplex(model)
    if not sx.phase1():
        return Infeasible(phase1_objective=-sx.obj1)
    return sx.solution(with_duals=False)


def check_solution(model: LPModel, sol: BasicSolution) -> List[str]:
    """Exact re-verification: every row satisfied, support <= row count."""
    out = []
    for i, (coeffs, rel, rhs) in enumerate(model.rows):
        lhs = sum((c * sol[v] for v, c in coeffs.items()), ZERO)
        ok = lhs <= rhs if rel == LE else lhs >= rhs if rel == GE else lhs == rhs
        if not ok:
            out.append("row %d: %s %s %s fails" % (i, lhs, rel, rhs))
    support = sum(1 for x in sol.values.values() if x > 0)
    if support > len(model.rows):
        out.append("support %d exceeds row count %d" % (support, len(model.rows)))
    return out


# -- column generation ----------------------------------------------------


@dataclass(frozen=True)
class Column:
    """A priced-out master column: identity, objective cost, row coefficients."""

    var: Var
    cost: Fraction
    coeffs: Dict[int, Fraction]


class NoColumn:
    """Certificate: no absent column is violated beyond the oracle's factor."""


NO_COLUMN = NoColumn()


class ColumnGenerationLimit(Exception):
    """Iteration cap hit before the pricing oracle certified optimality."""


def column_generation(
    master: LPModel,
    oracle: Callable[[Tuple[Fraction, ...]], Union[Column, NoColumn]],
    max_iterations: int = 2000,
) -> BasicSolution:
    """Solve a restricted master to proven near-optimality of the full LP.

    The master must be feasible with its initial columns.  Each round solves
    the restriction exactly, hands the duals to the pricing oracle, and
    either stops (NoColumn: the scaled duals are feasible for every column
    of the full model, so the restricted optimum is within the oracle's
    (1+eps) factor of the full optimum) or warm-starts with the new column.
    """
    sx = Simplex(master)
    if not sx.phase1():
        raise InternalError("initial restricted master is infeasible")
    if sx.phase2() is not None:
        raise InternalError("master LP unbounded")
    for _ in range(max_iterations):
        sol = sx.solution()
        col = oracle(sol.duals)
        if isinstance(col, NoColumn):
            return sol
        if col.var in sx.col_of:
            raise InternalError("oracle re-priced existing column %r" % (col.var,))
        sx.add_column(col.var, col.cost, col.coeffs)
        if sx.phase2() is not None:
            raise InternalError("master LP unbounded after column %r" % (col.var,))
    raise ColumnGenerationLimit("no convergence after %d iterations" % max_iterations)
