"""Seeded instance generators: uniform grid, clustered, adversarial.

All sizes live on an exact rational grid, so generated files obey the
no-binary-floats rule by construction, and a fixed seed reproduces the same
file byte for byte.  The adversarial mode stresses the cardinality rule: it
emits item counts congruent to 1 mod k with sizes just under the threshold
where k+1 items plus one idle period fill a bin.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

from .ioformat import FormatError, InstanceFile
from .model import RationalLike, rat

DISTRIBUTIONS = ("uniform", "clustered", "adversarial")

GRID = 64  # denominator of the base size grid
JITTER = GRID * 8  # denominator of the cluster jitter


@dataclass(frozen=True)
class GenSpec:
    """What to generate: problem kind, shape, idle rule, distribution, seed."""

    kind: str
    n: int
    k: int
    U: Fraction
    dist: str = "uniform"
    seed: int = 0
    m: Optional[int] = None

    def __init__(
        self,
        kind: str,
        n: int,
        k: int,
        U: RationalLike,
        dist: str = "uniform",
        seed: int = 0,
        m: Optional[int] = None,
    ):
        if dist not in DISTRIBUTIONS:
            raise FormatError("dist", "expected one of %s, got %r" % (list(DISTRIBUTIONS), dist))
        if n < 0:
            raise FormatError("n", "must be >= 0, got %d" % n)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "k", int(k))
        object.__setattr__(self, "U", rat(U))
        object.__setattr__(self, "dist", dist)
        object.__setattr__(self, "seed", int(seed))
        object.__setattr__(self, "m", None if m is None else int(m))


def _clamp(x: Fraction, lo: Fraction, hi: Fraction) -> Fraction:
    return min(max(x, lo), hi)


def _uniform(rng: random.Random, n: int, hi_num: int) -> Tuple[Fraction, ...]:
    return tuple(Fraction(rng.randint(0, hi_num), GRID) for _ in range(n))


def _clustered(rng: random.Random, n: int, hi_num: int) -> Tuple[Fraction, ...]:
    ncl = min(3, max(1, n))
    centers = [Fraction(rng.randint(0, hi_num), GRID) for _ in range(ncl)]
    lo, hi = Fraction(0), Fraction(hi_num, GRID)
    return tuple(
        _clamp(rng.choice(centers) + Fraction(rng.randint(-2, 2), JITTER), lo, hi)
        for _ in range(n)
    )


def _adversarial(rng: random.Random, n: int, k: int, U: Fraction) -> Tuple[Fraction, ...]:
    # Bins want to hold c*k + 1 items: sizes sit just below (1 - U)/(k + 1),
    # where k+1 copies plus the idle period they trigger exactly fill a bin.
    if n and n % k != 1:
        n += (1 - n) % k
    base = max(Fraction(0), (1 - U) / (k + 1))
    return tuple(base * Fraction(rng.randint(GRID - 3, GRID), GRID) for _ in range(n))


def generate_instance(spec: GenSpec) -> InstanceFile:
    """Deterministic instance for the given spec; n = 0 yields an empty file.

    Scheduling sizes range over [0, 3]; packing sizes over [0, 1] (the
    adversarial threshold keeps them there on its own).
    """
    rng = random.Random(spec.seed)
    hi_num = GRID if spec.kind == "packing" else 3 * GRID
    if spec.dist == "uniform":
        sizes = _uniform(rng, spec.n, hi_num)
    elif spec.dist == "clustered":
        sizes = _clustered(rng, spec.n, hi_num)
    else:
        sizes = _adversarial(rng, spec.n, spec.k, spec.U)
    return InstanceFile(kind=spec.kind, k=spec.k, U=spec.U, sizes=sizes, m=spec.m)
