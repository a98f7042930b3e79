"""Problem data, exact load formulas, and feasibility verification.

Both problems share the same load rule: a machine (or bin) holding the size
multiset sigma has load

    sum(sigma) + U * floor((|sigma| - 1) / k),

i.e. one idle period of length U opens after every k jobs except that the
last batch never triggers one.  The scheduling problem (SUP) fixes m machines
and minimizes the makespan; the packing problem (BPU) caps each bin's load at
1 and minimizes the number of bins.

Everything in this module is exact `fractions.Fraction` arithmetic; no floats.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Sequence, Tuple, Union

RationalLike = Union[Fraction, int, str]


class InternalError(Exception):
    """A should-be-impossible state was reached; indicates a bug, not bad input."""


def rat(x: RationalLike) -> Fraction:
    """Coerce ints, Fractions, and strings like '3/10' or '0.3' to Fraction.

    Strings go through Fraction(str) so decimal text stays exact; floats are
    deliberately rejected to keep binary rounding noise out of instances.
    """
    if isinstance(x, float):
        raise TypeError("refusing float %r; pass a string or Fraction" % (x,))
    return Fraction(x)


@dataclass(frozen=True)
class Eps:
    """An accuracy parameter eps in (0, 1] with 1/eps a positive integer."""

    value: Fraction

    def __init__(self, value: RationalLike):
        v = rat(value)
        if not (0 < v <= 1):
            raise ValueError("eps must lie in (0, 1], got %s" % v)
        if v.numerator != 1:
            raise ValueError("1/eps must be a positive integer, got eps=%s" % v)
        object.__setattr__(self, "value", v)

    @property
    def inv(self) -> int:
        """1/eps as an int."""
        return self.value.denominator

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class SchedulingInstance:
    """n jobs with nonnegative rational sizes, m machines, idle rule (k, U)."""

    job_sizes: Tuple[Fraction, ...]
    m: int
    k: int
    U: Fraction

    def __init__(self, job_sizes: Iterable[RationalLike], m: int, k: int, U: RationalLike):
        sizes = tuple(rat(p) for p in job_sizes)
        if len(sizes) < 1:
            raise ValueError("instance needs at least one job")
        if any(p < 0 for p in sizes):
            raise ValueError("job sizes must be >= 0")
        if m < 1 or k < 1:
            raise ValueError("m and k must be positive integers")
        u = rat(U)
        if u < 0:
            raise ValueError("U must be >= 0")
        object.__setattr__(self, "job_sizes", sizes)
        object.__setattr__(self, "m", int(m))
        object.__setattr__(self, "k", int(k))
        object.__setattr__(self, "U", u)

    @property
    def n(self) -> int:
        return len(self.job_sizes)


@dataclass(frozen=True)
class PackingInstance:
    """n items with sizes in [0, 1], unit bins, idle rule (k, U), U in (0, 1]."""

    item_sizes: Tuple[Fraction, ...]
    k: int
    U: Fraction

    def __init__(self, item_sizes: Iterable[RationalLike], k: int, U: RationalLike):
        sizes = tuple(rat(s) for s in item_sizes)
        if len(sizes) < 1:
            raise ValueError("instance needs at least one item")
        if any(not (0 <= s <= 1) for s in sizes):
            raise ValueError("item sizes must lie in [0, 1]")
        if k < 1:
            raise ValueError("k must be a positive integer")
        u = rat(U)
        if not (0 < u <= 1):
            raise ValueError("U must lie in (0, 1]")
        object.__setattr__(self, "item_sizes", sizes)
        object.__setattr__(self, "k", int(k))
        object.__setattr__(self, "U", u)

    @property
    def n(self) -> int:
        return len(self.item_sizes)


@dataclass(frozen=True)
class Schedule:
    """A partition of job indices into m machine sequences.

    Empty machines are legal and contribute load 0.  The canonical
    within-machine order is non-increasing size with index tiebreak; every
    load formula is permutation invariant, so the order only matters to the
    early/late split used inside the EPTAS.
    """

    machines: Tuple[Tuple[int, ...], ...]

    def __init__(self, machines: Iterable[Iterable[int]]):
        object.__setattr__(
            self, "machines", tuple(tuple(int(j) for j in ms) for ms in machines)
        )

    @classmethod
    def canonical(cls, sizes: Sequence[Fraction], machines: Iterable[Iterable[int]]) -> "Schedule":
        """Build a schedule with each machine sorted by (-size, index)."""
        return cls(
            tuple(sorted(ms, key=lambda j: (-sizes[j], j))) for ms in machines
        )


@dataclass(frozen=True)
class Packing:
    """A partition of item indices into nonempty bins (emptiness is a violation)."""

    bins: Tuple[Tuple[int, ...], ...]

    def __init__(self, bins: Iterable[Iterable[int]]):
        object.__setattr__(
            self, "bins", tuple(tuple(int(i) for i in b) for b in bins)
        )


def idle_count(count: int, k: int) -> int:
    """Number of idle periods a batch of `count` jobs triggers: floor((count-1)/k).

    >>> idle_count(5, 2)
    2
    """
    if count < 1:
        raise ValueError("idle_count needs a nonempty batch")
    return (count - 1) // k


def schedule_load(sizes: Iterable[RationalLike], k: int, U: RationalLike) -> Fraction:
    """Exact load of a nonempty machine: sum of sizes plus U per full batch of k.

    >>> schedule_load([3, 2, 4], 2, 5)
    Fraction(14, 1)
    """
    ps = [rat(p) for p in sizes]
    if not ps:
        raise ValueError("schedule_load requires a nonempty multiset")
    return sum(ps, Fraction(0)) + rat(U) * idle_count(len(ps), k)


def bin_load(sizes: Iterable[RationalLike], k: int, U: RationalLike) -> Fraction:
    """Exact load of a nonempty bin; same formula as schedule_load.

    >>> bin_load(["3/10", "3/10", "3/10"], 2, "1/5")
    Fraction(11, 10)
    """
    ss = [rat(s) for s in sizes]
    if not ss:
        raise ValueError("bin_load requires a nonempty multiset")
    return sum(ss, Fraction(0)) + rat(U) * idle_count(len(ss), k)


def kmax(k: int, U: RationalLike) -> int:
    """Largest number of items a feasible bin can hold: floor(k/U) + k.

    After floor(k/U) + k items the idle mass alone exceeds 1.  Zero-sized
    items count toward the cap like any others.

    >>> kmax(3, Fraction(2, 5))
    10
    """
    u = rat(U)
    if u <= 0:
        raise ValueError("kmax undefined for U <= 0; BPU requires U in (0, 1]")
    return int(k / u) + k


def _partition_violations(n: int, groups: Sequence[Sequence[int]], what: str) -> List[str]:
    seen = {}
    out = []
    for gi, group in enumerate(groups):
        for j in group:
            if not (0 <= j < n):
                out.append("%s %d holds out-of-range index %d" % (what, gi, j))
            elif j in seen:
                out.append("index %d appears in %s %d and %s %d" % (j, what, seen[j], what, gi))
            else:
                seen[j] = gi
    missing = [j for j in range(n) if j not in seen]
    if missing:
        out.append("not a partition: indices %s unassigned" % missing)
    return out


def verify_schedule(inst: SchedulingInstance, sched: Schedule, bound: RationalLike) -> List[str]:
    """Check partition structure and per-machine load <= bound.

    Returns [] when the schedule is feasible, otherwise a list of violation
    strings carrying exact slack.  Violations are data, not exceptions.
    """
    b = rat(bound)
    out = []
    if len(sched.machines) != inst.m:
        out.append("expected %d machines, got %d" % (inst.m, len(sched.machines)))
    out.extend(_partition_violations(inst.n, sched.machines, "machine"))
    if out:
        return out
    for mi, ms in enumerate(sched.machines):
        if not ms:
            continue
        load = schedule_load([inst.job_sizes[j] for j in ms], inst.k, inst.U)
        if load > b:
            out.append("machine %d load %s exceeds %s by %s" % (mi, load, b, load - b))
    return out


def verify_packing(inst: PackingInstance, pack: Packing) -> List[str]:
    """Check partition structure, bin nonemptiness, and per-bin load <= 1."""
    out = []
    for bi, items in enumerate(pack.bins):
        if not items:
            out.append("bin %d is empty" % bi)
    out.extend(_partition_violations(inst.n, pack.bins, "bin"))
    if out:
        return out
    for bi, items in enumerate(pack.bins):
        load = bin_load([inst.item_sizes[i] for i in items], inst.k, inst.U)
        if load > 1:
            out.append("bin %d load %s exceeds 1 by %s" % (bi, load, load - 1))
    return out
