"""EPTAS front half for the scheduling problem.

Pipeline: round sizes up to exact powers of (1+eps) -> bound the optimum ->
binary-search a makespan guess T over the (1+eps)-power grid -> per guess,
classify jobs, enumerate machine configurations, and ask the MILP probe for
a schedule.  The reformulated load (early jobs at plain size, late jobs
inflated by U/k) is what configurations encode.

All arithmetic exact; T values and rounded sizes are rationals of the form
(1+eps)^e with integer e (possibly negative).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .model import (
    Eps,
    InternalError,
    Schedule,
    SchedulingInstance,
    schedule_load,
    verify_schedule,
)

ZERO = Fraction(0)


class ProbeInfeasible(Exception):
    """This makespan guess T cannot host the instance (e.g. a job exceeds T)."""


class AllInfeasible(InternalError):
    """The probe failed even at the upper bound; impossible for a correct probe."""


@dataclass(frozen=True)
class RoundedInstance:
    """Original instance plus sizes rounded up to integer powers of (1+eps)."""

    original: SchedulingInstance
    rounded_sizes: Tuple[Fraction, ...]
    eps: Eps

    @property
    def n(self) -> int:
        return self.original.n


@dataclass(frozen=True)
class JobClassification:
    """Small/large split at threshold eps*T, plus the distinct large sizes H."""

    T: Fraction
    small: Tuple[int, ...]
    large: Tuple[int, ...]
    large_sizes: Tuple[Fraction, ...]  # H, strictly decreasing


@dataclass(frozen=True)
class Configuration:
    """One machine's compact description under the reformulation.

    alpha counts large jobs per size in H; beta buckets the early small-job
    size in units of eps*T; gamma buckets the late small-job modified size
    (active only when gamma_prime=1); delta-1 counts guaranteed idle periods
    among early jobs; gamma_prime flags the presence of late jobs.
    """

    alpha: Tuple[Tuple[Fraction, int], ...]  # ((size, count), ...) size-descending
    beta: int
    gamma: int
    gamma_prime: int
    delta: int

    def alpha_count(self, size: Fraction) -> int:
        for s, c in self.alpha:
            if s == size:
                return c
        return 0

    @property
    def alpha_total(self) -> int:
        return sum(c for _, c in self.alpha)


def _pow_geq(base: Fraction, x: Fraction) -> Fraction:
    """Smallest integer power of `base` (>1) that is >= x > 0, exactly."""
    cur = Fraction(1)
    if cur >= x:
        while cur / base >= x:
            cur /= base
        return cur
    while cur < x:
        cur *= base
    return cur


def round_sizes(inst: SchedulingInstance, eps: Eps) -> RoundedInstance:
    """Round each positive size up to the next power of (1+eps); zero stays zero."""
    base = 1 + eps.value
    rounded = tuple(_pow_geq(base, p) if p > 0 else ZERO for p in inst.job_sizes)
    for p, r in zip(inst.job_sizes, rounded):
        if not (p <= r <= (1 + eps.value) * p or (p == 0 and r == 0)):
            raise InternalError("rounding sandwich broken: %s -> %s" % (p, r))
    return RoundedInstance(original=inst, rounded_sizes=rounded, eps=eps)


def makespan_bounds(rinst: RoundedInstance) -> Tuple[Fraction, Fraction]:
    """(LB, UB) for the optimal rounded makespan.

    LB = max(largest size, average load), raised to U when more than m*k jobs
    force an idle period somewhere; UB schedules everything on one machine.
    """
    inst = rinst.original
    total = sum(rinst.rounded_sizes, ZERO)
    lb = max(max(rinst.rounded_sizes), total / inst.m)
    if inst.n > inst.m * inst.k:
        lb = max(lb, inst.U)
    ub = total + inst.U * ((inst.n - 1) // inst.k)
    return lb, ub


def candidate_grid(lb: Fraction, ub: Fraction, eps: Eps) -> Tuple[Fraction, ...]:
    """All integer powers of (1+eps) from the first >= lb to the first >= ub."""
    if not (0 < lb <= ub):
        raise ValueError("need 0 < lb <= ub")
    base = 1 + eps.value
    out = [_pow_geq(base, lb)]
    while out[-1] < ub:
        out.append(out[-1] * base)
    return tuple(out)


@dataclass
class SearchState:
    """Bisection bookkeeping over the candidate grid."""

    candidates: List[Fraction]
    lo: int
    hi: int
    best: Optional[Tuple[Fraction, Schedule]] = None


def binary_search(
    candidates: Sequence[Fraction],
    probe: Callable[[Fraction], Optional[Schedule]],
) -> Tuple[Fraction, Schedule]:
    """Smallest candidate where the probe succeeds, plus that schedule.

    The probe returns None on failure.  Feasibility is assumed monotone in T;
    the final guarantees are checked against the returned schedule, not
    against monotonicity.
    """
    state = SearchState(candidates=list(candidates), lo=0, hi=len(candidates) - 1)
    while state.lo < state.hi:
        mid = (state.lo + state.hi) // 2
        sched = probe(state.candidates[mid])
        if sched is not None:
            state.best = (state.candidates[mid], sched)
            state.hi = mid
        else:
            state.lo = mid + 1
    T = state.candidates[state.lo]
    if state.best is not None and state.best[0] == T:
        return state.best
    sched = probe(T)
    if sched is None:
        raise AllInfeasible("probe failed at every candidate up to %s" % T)
    return T, sched


def classify_jobs(rinst: RoundedInstance, T: Fraction) -> JobClassification:
    """Partition jobs by rounded size < eps*T (strictly) vs >= eps*T."""
    eps = rinst.eps.value
    small, large = [], []
    for j, p in enumerate(rinst.rounded_sizes):
        if p > T:
            raise ProbeInfeasible("job %d has rounded size %s > T=%s" % (j, p, T))
        (small if p < eps * T else large).append(j)
    sizes = sorted({rinst.rounded_sizes[j] for j in large}, reverse=True)
    # |H| can't beat the power count in [eps*T, T]: log_{1+eps}(1/eps) + 1.
    limit, cur = 1, Fraction(1)
    while cur * eps < 1:
        cur *= 1 + eps
        limit += 1
    if len(sizes) > limit:
        raise InternalError("distinct large sizes %d exceed %d" % (len(sizes), limit))
    return JobClassification(
        T=T, small=tuple(small), large=tuple(large), large_sizes=tuple(sizes)
    )


def reformulated_load(
    sizes_in_order: Sequence[Fraction], k: int, U: Fraction, eps: Eps
) -> Fraction:
    """Machine load after the early/late reformulation.

    The first k/eps jobs (canonical order) are early and keep their size;
    the idle periods among them are charged exactly.  Every later job pays
    an extra U/k, and the early idle mass is overcharged to U/eps flat.
    """
    sizes = list(sizes_in_order)
    cap = k * eps.inv
    if len(sizes) <= cap:
        if not sizes:
            return ZERO
        return schedule_load(sizes, k, U)
    early, late = sizes[:cap], sizes[cap:]
    return (
        sum(early, ZERO)
        + sum(late, ZERO)
        + Fraction(len(late)) * U / k
        + U * eps.inv
    )


def configuration_load(c: Configuration, T: Fraction, eps: Eps, U: Fraction) -> Fraction:
    """Sum of large sizes + small-size buckets + charged idle periods."""
    e = eps.value
    load = sum((s * cnt for s, cnt in c.alpha), ZERO)
    load += c.beta * e * T
    load += c.gamma_prime * c.gamma * e * T
    load += U * (c.delta - 1 + c.gamma_prime)
    return load


def enumerate_configurations(
    cls: JobClassification, T: Fraction, eps: Eps, k: int, U: Fraction
) -> List[Configuration]:
    """All configurations with load <= T, components in range, in stable order."""
    inv = eps.inv
    H = cls.large_sizes
    out: List[Configuration] = []

    def alphas(idx: int, prefix: List[Tuple[Fraction, int]], load: Fraction):
        if load > T:
            return
        if idx == len(H):
            yield tuple(prefix), load
            return
        s = H[idx]
        for cnt in range(inv + 1):
            new_load = load + s * cnt
            if new_load > T:
                break
            prefix.append((s, cnt))
            yield from alphas(idx + 1, prefix, new_load)
            prefix.pop()

    e = eps.value
    for alpha, alpha_load in alphas(0, [], ZERO):
        compact = tuple((s, c) for s, c in alpha if c)
        for gamma_prime in (0, 1):
            gammas = range(inv + 1) if gamma_prime else (0,)
            for gamma in gammas:
                for beta in range(inv + 1):
                    for delta in range(1, inv + 2):
                        load = (
                            alpha_load
                            + beta * e * T
                            + gamma_prime * gamma * e * T
                            + U * (delta - 1 + gamma_prime)
                        )
                        if load <= T:
                            out.append(
                                Configuration(
                                    alpha=compact,
                                    beta=beta,
                                    gamma=gamma,
                                    gamma_prime=gamma_prime,
                                    delta=delta,
                                )
                            )
    out.sort(key=lambda c: (c.alpha, c.beta, c.gamma, c.gamma_prime, c.delta))
    return out


# -- pipeline -------------------------------------------------------------


@dataclass(frozen=True)
class SchedResult:
    """Output of the scheduling scheme: schedule, exact makespan, search value."""

    schedule: Schedule
    makespan: Fraction
    T_star: Fraction
    eps: Eps


def _round_robin(inst: SchedulingInstance) -> Schedule:
    machines: List[List[int]] = [[] for _ in range(inst.m)]
    for j in range(inst.n):
        machines[j % inst.m].append(j)
    return Schedule.canonical(inst.job_sizes, machines)


def makespan_of(inst: SchedulingInstance, sched: Schedule) -> Fraction:
    loads = [
        schedule_load([inst.job_sizes[j] for j in ms], inst.k, inst.U)
        for ms in sched.machines
        if ms
    ]
    return max(loads) if loads else ZERO


def solve_sched(inst: SchedulingInstance, eps: Eps, milp_max_nodes: int = 200_000) -> SchedResult:
    """The full scheme: rounded grid search over MILP probes.

    The returned schedule's exact makespan (original sizes) is within
    (1+eps)^3 (1+3eps) of optimal; the factors come from rounding, the
    search grid, the reformulation, and the configuration construction.
    """
    from .build import milp_to_schedule
    from .milp import Infeasible as MilpInfeasible, build_milp, solve_milp

    rinst = round_sizes(inst, eps)
    lb, ub = makespan_bounds(rinst)
    if lb == 0:
        # Only possible when every size is 0 and no idle period is forced:
        # spread jobs k-per-machine (or anywhere when U=0) for makespan 0.
        sched = _round_robin(inst)
        if makespan_of(inst, sched) != 0:
            raise InternalError("zero lower bound on a nonzero instance")
        return SchedResult(schedule=sched, makespan=ZERO, T_star=ZERO, eps=eps)

    seen: dict = {}

    def probe(T: Fraction) -> Optional[Schedule]:
        if T in seen:
            return seen[T]
        try:
            cls = classify_jobs(rinst, T)
        except ProbeInfeasible:
            seen[T] = None
            return None
        configs = enumerate_configurations(cls, T, eps, inst.k, inst.U)
        model = build_milp(configs, cls, rinst, T)
        sol = solve_milp(model, max_nodes=milp_max_nodes)
        out = (
            None
            if isinstance(sol, MilpInfeasible)
            else milp_to_schedule(sol, configs, cls, rinst, T, eps)
        )
        seen[T] = out
        return out

    T_star, sched = binary_search(candidate_grid(lb, ub, eps), probe)
    bound = (1 + 3 * eps.value) * T_star
    bad = verify_schedule(inst, sched, bound)
    if bad:
        raise InternalError("schedule misses (1+3eps)T* on original sizes: %s" % bad)
    return SchedResult(
        schedule=sched, makespan=makespan_of(inst, sched), T_star=T_star, eps=eps
    )
