"""Turn a feasible MILP solution into an integral schedule.

The fractional small-job mass is rounded machine-by-machine with a slot
argument: machine i gets c_i unit-capacity slots, its fractional jobs are
poured into the slots in non-increasing size order (splitting at slot
boundaries), and a perfect matching of jobs to supporting slots picks the
integral assignment.  Every slot before a nonempty one is exactly full, so
the matched job in slot s is no larger than the average content of slot
s-1; summing gives load <= t_i + pi_max and at most c_i jobs per machine.

(The obvious greedy -- walk machines in order, stuff jobs while they fit --
can strand a job when an early machine steals one that a later
cardinality-1 machine needed, so the matching route is used instead.)
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

from .model import (
    InternalError,
    Schedule,
    SchedulingInstance,
    idle_count,
    verify_schedule,
)
from .sup import Configuration, Eps, JobClassification, RoundedInstance

ZERO = Fraction(0)
ONE = Fraction(1)


class InvalidInput(Exception):
    """A fractional assignment that breaks its own invariants."""


@dataclass
class FractionalAssignment:
    """Fractional placement of jobs on machines with per-machine caps.

    ``sizes`` maps job id -> size for every participating job; ``u`` holds
    the positive masses keyed by (job, machine); ``t`` and ``c`` are the
    per-machine size and cardinality capacities.
    """

    sizes: Dict[int, Fraction]
    u: Dict[Tuple[int, int], Fraction]
    t: Tuple[Fraction, ...]
    c: Tuple[int, ...]

    def violations(self) -> List[str]:
        out = []
        if len(self.t) != len(self.c):
            out.append("capacity vectors differ in length")
            return out
        m = len(self.t)
        per_job: Dict[int, Fraction] = {j: ZERO for j in self.sizes}
        load = [ZERO] * m
        mass = [ZERO] * m
        for (j, i), v in self.u.items():
            if j not in self.sizes:
                out.append("mass on unknown job %r" % (j,))
                return out
            if not 0 <= i < m:
                out.append("mass on unknown machine %r" % (i,))
                return out
            if not ZERO <= v <= ONE:
                out.append("u[%d,%d] = %s outside [0,1]" % (j, i, v))
            per_job[j] += v
            load[i] += v * self.sizes[j]
            mass[i] += v
        for j, tot in per_job.items():
            if tot != 1:
                out.append("job %d has total mass %s, want 1" % (j, tot))
        for i in range(m):
            if load[i] > self.t[i]:
                out.append("machine %d load %s > t_i = %s" % (i, load[i], self.t[i]))
            if mass[i] > self.c[i]:
                out.append("machine %d mass %s > c_i = %d" % (i, mass[i], self.c[i]))
        return out


def _pour(fa: FractionalAssignment, i: int) -> List[List[Tuple[int, Fraction]]]:
    """Split machine i's mass into c_i unit slots, largest sizes first."""
    items = sorted(
        ((j, v) for (j, mi), v in fa.u.items() if mi == i and v > 0),
        key=lambda jv: (-fa.sizes[jv[0]], jv[0]),
    )
    slots: List[List[Tuple[int, Fraction]]] = [[] for _ in range(fa.c[i])]
    s = 0
    room = ONE
    for j, v in items:
        while v > 0:
            take = min(v, room)
            slots[s].append((j, take))
            v -= take
            room -= take
            if room == 0:
                s += 1
                room = ONE
    return slots


def _kuhn(adj: Dict[int, List[int]], order: Sequence[int], nslots: int) -> Dict[int, int]:
    """Maximum bipartite matching (jobs -> slots), Hungarian augmenting paths."""
    match: List[int] = [-1] * nslots  # slot -> job
    where: Dict[int, int] = {}

    def augment(j: int, seen: List[bool]) -> bool:
        for s in adj[j]:
            if seen[s]:
                continue
            seen[s] = True
            if match[s] == -1 or augment(match[s], seen):
                match[s] = j
                where[j] = s
                return True
        return False

    for j in order:
        if not augment(j, [False] * nslots):
            raise InternalError("fractional assignment admits no perfect matching")
    return where


def best_fit_round(fa: FractionalAssignment) -> Tuple[Tuple[int, ...], ...]:
    """Integral assignment: job lists per machine, load <= t_i + pi_max.

    >>> f = FractionalAssignment({0: Fraction(1, 4)}, {(0, 1): Fraction(1)},
    ...                          (Fraction(1), Fraction(1)), (1, 1))
    >>> best_fit_round(f)
    ((), (0,))
    """
    bad = fa.violations()
    if bad:
        raise InvalidInput("; ".join(bad))
    m = len(fa.t)
    slot_of: List[Tuple[int, int]] = []  # global slot id -> (machine, local)
    adj: Dict[int, List[int]] = {j: [] for j in fa.sizes}
    for i in range(m):
        for local, content in enumerate(_pour(fa, i)):
            if not content:
                continue
            sid = len(slot_of)
            slot_of.append((i, local))
            for j, _ in content:
                if sid not in adj[j]:
                    adj[j].append(sid)
    order = sorted(fa.sizes, key=lambda j: (-fa.sizes[j], j))
    where = _kuhn(adj, order, len(slot_of))
    out: List[List[int]] = [[] for _ in range(m)]
    for j, sid in where.items():
        out[slot_of[sid][0]].append(j)
    result = tuple(tuple(sorted(js, key=lambda j: (-fa.sizes[j], j))) for js in out)
    pi = max(fa.sizes.values(), default=ZERO)
    for i in range(m):
        if len(result[i]) > fa.c[i]:
            raise InternalError("machine %d got %d > c_i jobs" % (i, len(result[i])))
        load = sum((fa.sizes[j] for j in result[i]), ZERO)
        if load > fa.t[i] + pi:
            raise InternalError("machine %d load %s > t_i + pi_max" % (i, load))
    return result


def milp_to_schedule(
    sol,
    configs: Sequence[Configuration],
    cls: JobClassification,
    rinst: RoundedInstance,
    T: Fraction,
    eps: Eps,
) -> Schedule:
    """Expand configuration counters into machines and round the small mass.

    The output passes verify_schedule against (1+3*eps)*T on the rounded
    sizes; that slack decomposes as one eps*T for the small-size budgets'
    +1, one for the largest small job added by rounding, and one for the
    late budget's +1 whose U/k share pays the extra idle periods.
    """
    inst = rinst.original
    index = {c: ci for ci, c in enumerate(configs)}
    expanded: List[Configuration] = []
    for c in sorted(sol.x, key=lambda c: index[c]):
        expanded.extend([c] * sol.x[c])
    if len(expanded) != inst.m:
        raise InternalError("x expands to %d machines, want %d" % (len(expanded), inst.m))

    pools: Dict[Fraction, List[int]] = {}
    for j in sorted(cls.large):
        pools.setdefault(rinst.rounded_sizes[j], []).append(j)
    machines: List[List[int]] = []
    for c in expanded:
        mine: List[int] = []
        for size, cnt in c.alpha:
            pool = pools.get(size, [])
            if len(pool) < cnt:
                raise InternalError("large pool for size %s exhausted" % (size,))
            mine.extend(pool[:cnt])
            del pool[:cnt]
        machines.append(mine)
    if any(pools.values()):
        raise InternalError("large jobs left over after expanding x")

    if cls.small:
        u: Dict[Tuple[int, int], Fraction] = {}
        for i, c in enumerate(expanded):
            xc = sol.x[c]
            for j in cls.small:
                mass = sol.y.get((j, c), ZERO) + sol.z.get((j, c), ZERO)
                if mass:
                    u[(j, i)] = mass / xc
        t = []
        cap = []
        for i in range(inst.m):
            tot = sum((v for (j, mi), v in u.items() if mi == i), ZERO)
            ti = sum((v * rinst.rounded_sizes[j] for (j, mi), v in u.items() if mi == i), ZERO)
            t.append(ti)
            cap.append(-(-tot.numerator // tot.denominator) if tot else 0)
        fa = FractionalAssignment(
            sizes={j: rinst.rounded_sizes[j] for j in cls.small},
            u=u,
            t=tuple(t),
            c=tuple(cap),
        )
        for i, js in enumerate(best_fit_round(fa)):
            machines[i].extend(js)

    sched = Schedule.canonical(inst.job_sizes, machines)
    rounded = SchedulingInstance(
        job_sizes=rinst.rounded_sizes, m=inst.m, k=inst.k, U=inst.U
    )
    bound = (1 + 3 * eps.value) * T
    bad = verify_schedule(rounded, sched, bound)
    if bad:
        raise InternalError("built schedule misses (1+3eps)T: %s" % "; ".join(bad))
    for i, c in enumerate(expanded):
        if inst.U > 0 and c.gamma_prime == 0 and sched.machines[i]:
            if idle_count(len(sched.machines[i]), inst.k) > c.delta - 1:
                raise InternalError("idle periods exceed delta-1 on machine %d" % i)
    return sched
