"""Bin packing with count-triggered idle items: dispatch and shared prep.

Two regimes, split by how many items a single bin can ever hold: when
kmax = floor(k/U) + k fits within 1/eps^2 the whole instance is rounded by
linear grouping and solved as a pure covering LP (case I); otherwise only
large items are grouped and the small ones ride along fractionally inside
an extended column model (case II).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

from .model import InternalError, Packing, PackingInstance, kmax, verify_packing
from .sup import Eps

ZERO = Fraction(0)


class Case(Enum):
    I = "I"
    II = "II"


def choose_case(k: int, U: Fraction, eps: Eps) -> Case:
    """Case I exactly when kmax(k,U) <= 1/eps^2.

    >>> choose_case(1, Fraction(1), Eps("1/2"))
    <Case.I: 'I'>
    """
    return Case.I if kmax(k, U) <= eps.inv**2 else Case.II


def classify_items(inst: PackingInstance, eps: Eps) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """(small, large) index partition; small means size strictly below eps."""
    small = tuple(i for i, s in enumerate(inst.item_sizes) if s < eps.value)
    large = tuple(i for i, s in enumerate(inst.item_sizes) if s >= eps.value)
    return small, large


@dataclass(frozen=True)
class GroupedItems:
    """Linear grouping output over one sorted item list.

    classes[0] is the extracted first class; every item of a later class is
    rounded up to its class maximum, merged into size_classes as
    (rounded size, count) in descending size order.
    """

    classes: Tuple[Tuple[int, ...], ...]
    class1: Tuple[int, ...]
    rounded: Dict[int, Fraction]
    size_classes: Tuple[Tuple[Fraction, int], ...]


def linear_grouping(
    items: Sequence[int], sizes: Sequence[Fraction], eps: Eps
) -> GroupedItems:
    """Split sorted `items` into 1/eps^3 classes, largest class first."""
    for a, b in zip(items, list(items)[1:]):
        if (sizes[a], -a) < (sizes[b], -b):
            raise ValueError("items must be sorted by non-increasing size")
    C = eps.inv**3
    N = len(items)
    lo, rem = divmod(N, C)
    cards = [lo + 1] * rem + [lo] * (C - rem)
    classes: List[Tuple[int, ...]] = []
    at = 0
    for card in cards:
        classes.append(tuple(items[at : at + card]))
        at += card
    rounded: Dict[int, Fraction] = {}
    merged: List[Tuple[Fraction, int]] = []
    for cl in classes[1:]:
        if not cl:
            continue
        top = sizes[cl[0]]
        for i in cl:
            rounded[i] = top
        if merged and merged[-1][0] == top:
            merged[-1] = (top, merged[-1][1] + len(cl))
        else:
            merged.append((top, len(cl)))
    return GroupedItems(
        classes=tuple(classes),
        class1=classes[0],
        rounded=rounded,
        size_classes=tuple(merged),
    )


def first_fit_decreasing(inst: PackingInstance) -> Packing:
    """Plain FFD respecting the idle-item load; exact and deterministic."""
    order = sorted(range(len(inst.item_sizes)), key=lambda i: (-inst.item_sizes[i], i))
    bins: List[List[int]] = []
    sums: List[Fraction] = []
    for i in order:
        s = inst.item_sizes[i]
        for b in range(len(bins)):
            cnt = len(bins[b]) + 1
            new = sums[b] + s + inst.U * ((cnt - 1) // inst.k)
            if new <= 1:
                bins[b].append(i)
                sums[b] = sums[b] + s
                break
        else:
            bins.append([i])  # a lone item always fits: s <= 1, no idle yet
            sums.append(s)
    return Packing(bins=tuple(tuple(sorted(b, key=lambda i: (-inst.item_sizes[i], i))) for b in bins))


@dataclass(frozen=True)
class PackResult:
    packing: Packing
    case: Case
    eps: Eps

    @property
    def nbins(self) -> int:
        return len(self.packing.bins)


def solve_pack(inst: PackingInstance, eps: Eps) -> PackResult:
    """Asymptotic scheme entry point: dispatch on the case split, verify."""
    case = choose_case(inst.k, inst.U, eps)
    if case is Case.I:
        from .bpu_case1 import solve_case1

        packing = solve_case1(inst, eps)
    else:
        from .bpu_case2 import solve_case2

        packing = solve_case2(inst, eps)
    bad = verify_packing(inst, packing)
    if bad:
        raise InternalError("packing fails verification: %s" % "; ".join(bad))
    return PackResult(packing=packing, case=case, eps=eps)
