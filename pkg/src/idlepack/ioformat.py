"""Instance and solution files: exact-rational JSON text.

Rationals travel as strings ("3/4", "0.25", "2") and are handed to
`fractions.Fraction` directly, so no value ever touches a binary float.
Emission is canonical ("p/q", or "p" for integers); parse(emit(x)) == x at
the payload level even though the source text "0.25" re-emits as "1/4".

`InstanceFile` / `SolutionFile` are the payload types; n = 0 is legal there
(an empty instance is a valid file) while the solver-facing model types
require at least one job/item.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Tuple, Union

from .model import (
    Packing,
    PackingInstance,
    Schedule,
    SchedulingInstance,
    schedule_load,
    verify_packing,
    verify_schedule,
)

KINDS = ("scheduling", "packing")


class FormatError(ValueError):
    """Malformed payload; `field` names the offending field."""

    def __init__(self, field: str, message: str):
        super().__init__("field %r: %s" % (field, message))
        self.field = field


def _rat(field: str, v) -> Fraction:
    """One rational from JSON: a string like '3/4'/'0.25', or an int."""
    if isinstance(v, bool):
        raise FormatError(field, "expected a rational, got a boolean")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, float):
        raise FormatError(field, "binary float %r not allowed; write it as a string" % v)
    if isinstance(v, str):
        try:
            return Fraction(v)
        except (ValueError, ZeroDivisionError) as e:
            raise FormatError(field, "not a rational: %s" % e)
    raise FormatError(field, "expected a rational string, got %s" % type(v).__name__)


def _int(field: str, v) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise FormatError(field, "expected an integer, got %r" % (v,))
    return v


def _groups(field: str, v) -> Tuple[Tuple[int, ...], ...]:
    if not isinstance(v, list):
        raise FormatError(field, "expected a list of index lists")
    out = []
    for gi, group in enumerate(v):
        if not isinstance(group, list):
            raise FormatError(field, "entry %d is not a list" % gi)
        out.append(tuple(_int("%s[%d]" % (field, gi), j) for j in group))
    return tuple(out)


@dataclass(frozen=True)
class InstanceFile:
    """Validated instance payload.

    `m` is present exactly for scheduling.  Range rules match the model
    types (k >= 1; U >= 0, and within (0, 1] for packing; packing sizes in
    [0, 1]) so an InstanceFile is always one `to_instance()` away from a
    solver instance -- except n = 0, which only exists at this level.
    """

    kind: str
    k: int
    U: Fraction
    sizes: Tuple[Fraction, ...]
    m: Optional[int] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise FormatError("kind", "expected one of %s, got %r" % (list(KINDS), self.kind))
        if self.k < 1:
            raise FormatError("k", "must be a positive integer, got %d" % self.k)
        if self.kind == "scheduling":
            if self.m is None:
                raise FormatError("m", "required for scheduling instances")
            if self.m < 1:
                raise FormatError("m", "must be a positive integer, got %d" % self.m)
            if self.U < 0:
                raise FormatError("U", "must be >= 0, got %s" % self.U)
            if any(s < 0 for s in self.sizes):
                raise FormatError("sizes", "job sizes must be >= 0")
        else:
            if self.m is not None:
                raise FormatError("m", "not allowed for packing instances")
            if not (0 < self.U <= 1):
                raise FormatError("U", "must lie in (0, 1] for packing, got %s" % self.U)
            if any(not (0 <= s <= 1) for s in self.sizes):
                raise FormatError("sizes", "item sizes must lie in [0, 1]")

    @property
    def n(self) -> int:
        return len(self.sizes)

    def to_instance(self) -> Union[SchedulingInstance, PackingInstance]:
        """The solver-facing instance; empty files have none."""
        if not self.sizes:
            raise FormatError("sizes", "empty instance cannot become a solver instance")
        if self.kind == "scheduling":
            return SchedulingInstance(self.sizes, m=self.m, k=self.k, U=self.U)
        return PackingInstance(self.sizes, k=self.k, U=self.U)


def emit_instance(f: InstanceFile) -> str:
    """Canonical text for an instance payload.

    >>> emit_instance(InstanceFile("packing", 2, Fraction(1, 2), (Fraction(1, 4),)))
    '{\\n "kind": "packing",\\n "k": 2,\\n "U": "1/2",\\n "sizes": ["1/4"]\\n}\\n'
    """
    obj = {"kind": f.kind, "k": f.k, "U": str(f.U)}
    if f.kind == "scheduling":
        obj["m"] = f.m
    obj["sizes"] = [str(s) for s in f.sizes]
    return json.dumps(obj, indent=1) + "\n"


def parse_instance_text(text: str) -> InstanceFile:
    """Parse instance text; every complaint names the field at fault."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError("json", str(e))
    if not isinstance(obj, dict):
        raise FormatError("json", "top level must be an object")
    kind = obj.get("kind")
    if kind not in KINDS:
        raise FormatError("kind", "expected one of %s, got %r" % (list(KINDS), kind))
    allowed = {"kind", "k", "U", "sizes"} | ({"m"} if kind == "scheduling" else set())
    for key in obj:
        if key not in allowed:
            raise FormatError(key, "unexpected field")
    for key in ("k", "U", "sizes"):
        if key not in obj:
            raise FormatError(key, "missing field")
    if kind == "scheduling" and "m" not in obj:
        raise FormatError("m", "missing field")
    if not isinstance(obj["sizes"], list):
        raise FormatError("sizes", "expected a list of rational strings")
    sizes = tuple(_rat("sizes[%d]" % i, s) for i, s in enumerate(obj["sizes"]))
    return InstanceFile(
        kind=kind,
        k=_int("k", obj["k"]),
        U=_rat("U", obj["U"]),
        sizes=sizes,
        m=_int("m", obj["m"]) if kind == "scheduling" else None,
    )


def read_instance(path) -> InstanceFile:
    return parse_instance_text(Path(path).read_text())


def parse_instance(path) -> Union[SchedulingInstance, PackingInstance]:
    """Read, validate, and convert an instance file in one step."""
    return read_instance(path).to_instance()


# -- solutions ------------------------------------------------------------


@dataclass(frozen=True)
class SolutionFile:
    """A solution payload: machine lists plus makespan, or bin lists.

    `kind` matches the instance kind it solves.  The recorded makespan is
    the claimed bound; verification recomputes every load exactly and also
    checks the claim equals the true maximum.
    """

    kind: str
    groups: Tuple[Tuple[int, ...], ...]
    makespan: Optional[Fraction] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise FormatError("kind", "expected one of %s, got %r" % (list(KINDS), self.kind))
        if self.kind == "scheduling":
            if self.makespan is None:
                raise FormatError("makespan", "required for scheduling solutions")
            if self.makespan < 0:
                raise FormatError("makespan", "must be >= 0, got %s" % self.makespan)
        elif self.makespan is not None:
            raise FormatError("makespan", "not allowed for packing solutions")


def emit_solution(sol: SolutionFile) -> str:
    if sol.kind == "scheduling":
        obj = {
            "kind": sol.kind,
            "makespan": str(sol.makespan),
            "machines": [list(g) for g in sol.groups],
        }
    else:
        obj = {"kind": sol.kind, "bins": [list(g) for g in sol.groups]}
    return json.dumps(obj, indent=1) + "\n"


def parse_solution_text(text: str) -> SolutionFile:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError("json", str(e))
    if not isinstance(obj, dict):
        raise FormatError("json", "top level must be an object")
    kind = obj.get("kind")
    if kind not in KINDS:
        raise FormatError("kind", "expected one of %s, got %r" % (list(KINDS), kind))
    key = "machines" if kind == "scheduling" else "bins"
    allowed = {"kind", key} | ({"makespan"} if kind == "scheduling" else set())
    for k in obj:
        if k not in allowed:
            raise FormatError(k, "unexpected field")
    if key not in obj:
        raise FormatError(key, "missing field")
    makespan = None
    if kind == "scheduling":
        if "makespan" not in obj:
            raise FormatError("makespan", "missing field")
        makespan = _rat("makespan", obj["makespan"])
    return SolutionFile(kind=kind, groups=_groups(key, obj[key]), makespan=makespan)


def read_solution(path) -> SolutionFile:
    return parse_solution_text(Path(path).read_text())


def verify_solution(f: InstanceFile, sol: SolutionFile) -> List[str]:
    """Re-verify a solution against its instance with exact arithmetic.

    Returns [] when everything checks out, else violation strings -- the
    same convention as the model verifiers, which do the heavy lifting here.
    """
    if sol.kind != f.kind:
        return ["solution kind %r does not match instance kind %r" % (sol.kind, f.kind)]
    if not f.sizes:
        out = []
        if any(g for g in sol.groups):
            out.append("empty instance but the solution assigns indices")
        if f.kind == "scheduling":
            if len(sol.groups) != f.m:
                out.append("expected %d machines, got %d" % (f.m, len(sol.groups)))
            if sol.makespan != 0:
                out.append("empty instance must record makespan 0, got %s" % sol.makespan)
        elif sol.groups:
            out.append("empty instance must use zero bins, got %d" % len(sol.groups))
        return out
    inst = f.to_instance()
    if f.kind == "scheduling":
        sched = Schedule(sol.groups)
        out = verify_schedule(inst, sched, sol.makespan)
        if out:
            return out
        loads = [
            schedule_load([inst.job_sizes[j] for j in ms], inst.k, inst.U)
            for ms in sched.machines
            if ms
        ]
        actual = max(loads) if loads else Fraction(0)
        if actual != sol.makespan:
            out.append(
                "recorded makespan %s differs from recomputed %s" % (sol.makespan, actual)
            )
        return out
    return verify_packing(inst, Packing(sol.groups))
