"""Solvers for scheduling and bin packing with cardinality-triggered idle periods.

After every k consecutive jobs a machine (or bin) incurs an idle period of
length U.  The package ships an EPTAS for makespan minimization on m parallel
machines under this rule, an AFPTAS for the dual bin packing problem, exact
branch-and-bound oracles for both, and a CLI for solving, verifying, and
benchmarking at desk scale.  All verification arithmetic is exact rational.
"""

from .model import (
    Eps,
    SchedulingInstance,
    PackingInstance,
    Schedule,
    Packing,
    schedule_load,
    bin_load,
    kmax,
    verify_schedule,
    verify_packing,
)
from .oracle import OracleLimits, Exceeded, exact_makespan, exact_bincount
from .sup import SchedResult, solve_sched
from .bpu import Case, PackResult, first_fit_decreasing, solve_pack
from .ioformat import (
    FormatError,
    InstanceFile,
    SolutionFile,
    emit_instance,
    emit_solution,
    parse_instance,
    read_instance,
    read_solution,
    verify_solution,
)
from .gen import GenSpec, generate_instance

__all__ = [
    "Eps",
    "SchedulingInstance",
    "PackingInstance",
    "Schedule",
    "Packing",
    "schedule_load",
    "bin_load",
    "kmax",
    "verify_schedule",
    "verify_packing",
    "OracleLimits",
    "Exceeded",
    "exact_makespan",
    "exact_bincount",
    "SchedResult",
    "solve_sched",
    "Case",
    "PackResult",
    "first_fit_decreasing",
    "solve_pack",
    "FormatError",
    "InstanceFile",
    "SolutionFile",
    "emit_instance",
    "emit_solution",
    "parse_instance",
    "read_instance",
    "read_solution",
    "verify_solution",
    "GenSpec",
    "generate_instance",
]
