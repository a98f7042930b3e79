"""Exact branch-and-bound oracles for both problems.

These are exponential-time ground-truth solvers for desk-scale instances
(n <= 12 by default).  They never approximate: when a limit is hit they
return an `Exceeded` marker instead of a possibly wrong optimum.

Search order follows the classic recipe: jobs/items are branched in
non-increasing size order, and because machines (bins) are identical a new
one may only be opened in index order, which kills the machine-permutation
symmetry.  Loads are maintained incrementally as exact (sum, count) pairs.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

from .model import (
    Packing,
    PackingInstance,
    Schedule,
    SchedulingInstance,
    bin_load,
    schedule_load,
)


@dataclass(frozen=True)
class OracleLimits:
    """Resource caps for an oracle call; exceeding any one yields Exceeded."""

    max_jobs: int = 12
    max_nodes: int = 5_000_000
    time_budget: float = 60.0  # seconds


@dataclass(frozen=True)
class Exceeded:
    """Distinct non-answer: a limit was hit before the search finished."""

    reason: str


class _Budget:
    """Node/time bookkeeping shared by both searches."""

    def __init__(self, limits: OracleLimits):
        self.limits = limits
        self.nodes = 0
        self.t0 = time.monotonic()
        self.exceeded: Optional[str] = None

    def tick(self) -> bool:
        """Count a node; True means stop (budget gone)."""
        self.nodes += 1
        if self.nodes > self.limits.max_nodes:
            self.exceeded = "node budget %d exhausted" % self.limits.max_nodes
            return True
        if self.nodes % 1024 == 0 and time.monotonic() - self.t0 > self.limits.time_budget:
            self.exceeded = "time budget %.1fs exhausted" % self.limits.time_budget
            return True
        return False


def _machine_load(s: Fraction, c: int, k: int, U: Fraction) -> Fraction:
    return s + U * ((c - 1) // k) if c else Fraction(0)


def exact_makespan(
    inst: SchedulingInstance, limits: OracleLimits = OracleLimits()
) -> "Tuple[Fraction, Schedule] | Exceeded":
    """Exact optimal makespan and a witness schedule, or Exceeded.

    Lower bound used for pruning: max{p_max, sum(p)/m, U if n > mk else 0};
    with more than mk jobs some machine holds > k of them and pays at least
    one idle period.
    """
    if inst.n > limits.max_jobs:
        return Exceeded("n=%d exceeds max_jobs=%d" % (inst.n, limits.max_jobs))
    order = sorted(range(inst.n), key=lambda j: (-inst.job_sizes[j], j))
    sizes = [inst.job_sizes[j] for j in order]
    m, k, U = inst.m, inst.k, inst.U

    lb = max(max(sizes), sum(sizes, Fraction(0)) / m)
    if inst.n > m * k:
        lb = max(lb, U)

    # Greedy incumbent (longest processing time first onto the least-loaded
    # outcome) so pruning has something to chew on from the start.
    g_sum = [Fraction(0)] * m
    g_cnt = [0] * m
    g_asg: List[int] = []
    for p in sizes:
        best_i, best_l = 0, None
        for i in range(m):
            l = _machine_load(g_sum[i] + p, g_cnt[i] + 1, k, U)
            if best_l is None or l < best_l:
                best_i, best_l = i, l
        g_sum[best_i] += p
        g_cnt[best_i] += 1
        g_asg.append(best_i)
    best_val = max(_machine_load(g_sum[i], g_cnt[i], k, U) for i in range(m))
    best_asg = list(g_asg)

    budget = _Budget(limits)
    cur_sum = [Fraction(0)] * m
    cur_cnt = [0] * m
    cur_asg = [0] * inst.n

    def rec(pos: int, used: int, cur_max: Fraction) -> None:
        nonlocal best_val, best_asg
        if budget.exceeded or best_val == lb:
            return
        if pos == inst.n:
            if cur_max < best_val:
                best_val = cur_max
                best_asg = list(cur_asg)
            return
        p = sizes[pos]
        for i in range(min(used + 1, m)):
            if budget.tick():
                return
            new_l = _machine_load(cur_sum[i] + p, cur_cnt[i] + 1, k, U)
            if new_l >= best_val:
                continue
            cur_sum[i] += p
            cur_cnt[i] += 1
            cur_asg[pos] = i
            rec(pos + 1, max(used, i + 1), max(cur_max, new_l))
            cur_sum[i] -= p
            cur_cnt[i] -= 1
            if budget.exceeded or best_val == lb:
                return

    rec(0, 0, Fraction(0))
    if budget.exceeded:
        return Exceeded(budget.exceeded)

    machines: List[List[int]] = [[] for _ in range(m)]
    for pos, i in enumerate(best_asg):
        machines[i].append(order[pos])
    sched = Schedule.canonical(inst.job_sizes, machines)
    check = max(
        (schedule_load([inst.job_sizes[j] for j in ms], k, U) for ms in sched.machines if ms),
        default=Fraction(0),
    )
    assert check == best_val
    return best_val, sched


def exact_bincount(
    inst: PackingInstance, limits: OracleLimits = OracleLimits()
) -> "Tuple[int, Packing] | Exceeded":
    """Exact minimum number of unit bins and a witness packing, or Exceeded."""
    if inst.n > limits.max_jobs:
        return Exceeded("n=%d exceeds max_jobs=%d" % (inst.n, limits.max_jobs))
    order = sorted(range(inst.n), key=lambda i: (-inst.item_sizes[i], i))
    sizes = [inst.item_sizes[i] for i in order]
    k, U = inst.k, inst.U

    # First-fit decreasing incumbent.
    f_sum: List[Fraction] = []
    f_cnt: List[int] = []
    f_asg: List[int] = []
    for s in sizes:
        for b in range(len(f_sum)):
            if _machine_load(f_sum[b] + s, f_cnt[b] + 1, k, U) <= 1:
                f_sum[b] += s
                f_cnt[b] += 1
                f_asg.append(b)
                break
        else:
            f_sum.append(s)
            f_cnt.append(1)
            f_asg.append(len(f_sum) - 1)
    best_bins = len(f_sum)
    best_asg = list(f_asg)

    budget = _Budget(limits)
    cur_sum: List[Fraction] = []
    cur_cnt: List[int] = []
    cur_asg = [0] * inst.n

    def rec(pos: int) -> None:
        nonlocal best_bins, best_asg
        if budget.exceeded or best_bins == 1:
            return
        if pos == inst.n:
            if len(cur_sum) < best_bins:
                best_bins = len(cur_sum)
                best_asg = list(cur_asg)
            return
        if len(cur_sum) >= best_bins:
            return
        s = sizes[pos]
        for b in range(len(cur_sum) + 1):
            if budget.tick():
                return
            if b == len(cur_sum):
                if len(cur_sum) + 1 >= best_bins:
                    break
                cur_sum.append(s)
                cur_cnt.append(1)
                cur_asg[pos] = b
                rec(pos + 1)
                cur_sum.pop()
                cur_cnt.pop()
            else:
                if _machine_load(cur_sum[b] + s, cur_cnt[b] + 1, k, U) > 1:
                    continue
                cur_sum[b] += s
                cur_cnt[b] += 1
                cur_asg[pos] = b
                rec(pos + 1)
                cur_sum[b] -= s
                cur_cnt[b] -= 1
            if budget.exceeded or best_bins == 1:
                return

    rec(0)
    if budget.exceeded:
        return Exceeded(budget.exceeded)

    bins: List[List[int]] = [[] for _ in range(best_bins)]
    for pos, b in enumerate(best_asg):
        bins[b].append(order[pos])
    pack = Packing(tuple(sorted(b) for b in bins))
    for b in pack.bins:
        assert b and bin_load([inst.item_sizes[i] for i in b], k, U) <= 1
    return best_bins, pack
