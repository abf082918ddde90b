"""Split an instance into its stacker and trolley subproblems and merge the results."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping

from .core import ContainerClass, Instance, Solution, Subproblem


class LimitRule(str, enum.Enum):
    PER_PCB_STACKER_COUNT = "per-pcb"
    UNIFORM_STACKER_RESERVE = "uniform"


class InfeasibleLimits(ValueError):
    """A PCB cannot fit its trolley components within the positions left to it."""

    def __init__(self, pcb: str, detail: str):
        self.pcb = pcb
        super().__init__(f"PCB {pcb}: {detail}")


class InconsistentSolutions(ValueError):
    pass


def _subproblem(inst: Instance, cls: ContainerClass, max_containers: int,
                limits: Mapping[str, int]) -> Subproblem:
    members = [c for c in inst.components if c.cls is cls]
    ids = {c.id for c in members}
    groups = {p.id: sorted(p.required & ids) for p in inst.pcbs}
    return Subproblem([(c.id, c.size) for c in members], inst.capacity_of(cls),
                      max_containers, groups, limits)


def build_stacker_subproblem(inst: Instance) -> Subproblem:
    cap = inst.line.max_stackers
    return _subproblem(inst, ContainerClass.STACKER, cap, {p.id: cap for p in inst.pcbs})


@dataclass(frozen=True)
class DecompositionPlan:
    stacker_subproblem: Subproblem
    rule: LimitRule
    reserved: Mapping[str, int]
    limits: Mapping[str, int]


def stacker_reservations(inst: Instance, stacker_solution: Solution,
                         rule: LimitRule = LimitRule.PER_PCB_STACKER_COUNT) -> dict[str, int]:
    """Line positions taken by stackers while each PCB is being built."""
    rule = LimitRule(rule)
    where = stacker_solution.assignment
    total = len(stacker_solution.used)
    out = {}
    for p in inst.pcbs:
        touched = {where[c] for c in p.required if c in where}
        if not touched:
            out[p.id] = 0
        elif rule is LimitRule.PER_PCB_STACKER_COUNT:
            out[p.id] = len(touched)
        else:
            out[p.id] = total
    return out


def derive_trolley_limits(inst: Instance, stacker_solution: Solution,
                          rule: LimitRule = LimitRule.PER_PCB_STACKER_COUNT) -> dict[str, int]:
    reserved = stacker_reservations(inst, stacker_solution, rule)
    sizes = {c.id: c for c in inst.components}
    N = inst.line.trolley_capacity
    limits = {}
    for p in inst.pcbs:
        lim = inst.line.container_positions - reserved[p.id]
        demand = sum(sizes[c].size for c in p.required
                     if sizes[c].cls is ContainerClass.TROLLEY)
        need = math.ceil(demand / N)
        if lim < need:
            raise InfeasibleLimits(p.id, f"needs {need} trolleys for {demand} slots "
                                         f"but only {lim} positions remain")
        limits[p.id] = lim
    return limits


def plan_decomposition(inst: Instance, stacker_solution: Solution,
                       rule: LimitRule = LimitRule.PER_PCB_STACKER_COUNT) -> DecompositionPlan:
    return DecompositionPlan(build_stacker_subproblem(inst), LimitRule(rule),
                             stacker_reservations(inst, stacker_solution, rule),
                             derive_trolley_limits(inst, stacker_solution, rule))


def build_trolley_subproblem(inst: Instance, limits: Mapping[str, int]) -> Subproblem:
    """Trolley-class packing problem; limits above the trolley budget are clipped to it."""
    T = inst.line.max_trolleys
    clipped = {}
    for p in inst.pcbs:
        if p.id not in limits:
            raise KeyError(f"no trolley limit for PCB {p.id!r}")
        if limits[p.id] <= 0:
            raise InfeasibleLimits(p.id, f"trolley limit {limits[p.id]} leaves no trolley positions")
        clipped[p.id] = min(limits[p.id], T)
    return _subproblem(inst, ContainerClass.TROLLEY, T, clipped)


@dataclass(frozen=True)
class ContainerLoad:
    kind: ContainerClass
    index: int
    components: tuple
    used_slots: int
    capacity: int

    @property
    def fill(self) -> float:
        return 100.0 * self.used_slots / self.capacity


@dataclass(frozen=True)
class LoadingPlan:
    containers: tuple
    # PCB id -> (trolley indices, stacker indices) to mount
    pulls: Mapping[str, tuple]
    trolleys: int
    stackers: int

    @property
    def objective(self) -> tuple[int, int]:
        return (self.trolleys, self.stackers)

    def container_of(self, component: str) -> tuple[ContainerClass, int]:
        for c in self.containers:
            if component in c.components:
                return c.kind, c.index
        raise KeyError(component)


def _loads(kind: ContainerClass, sol: Solution, sizes: Mapping[str, int], cap: int) -> list[ContainerLoad]:
    by: dict[int, list[str]] = {}
    for item, t in sol.assignment.items():
        by.setdefault(t, []).append(item)
    return [ContainerLoad(kind, t, tuple(sorted(by[t])), sum(sizes[i] for i in by[t]), cap)
            for t in sorted(by)]


def merge_solutions(inst: Instance, trolley_solution: Solution,
                    stacker_solution: Solution) -> LoadingPlan:
    overlap = set(trolley_solution.assignment) & set(stacker_solution.assignment)
    if overlap:
        raise InconsistentSolutions(f"components in both solutions: {sorted(overlap)}")
    sizes = {c.id: c.size for c in inst.components}
    missing = set(sizes) - set(trolley_solution.assignment) - set(stacker_solution.assignment)
    if missing:
        raise InconsistentSolutions(f"components not loaded: {sorted(missing)}")
    containers = (_loads(ContainerClass.TROLLEY, trolley_solution, sizes, inst.line.trolley_capacity)
                  + _loads(ContainerClass.STACKER, stacker_solution, sizes, inst.line.stacker_capacity))
    pulls = {}
    for p in sorted(inst.pcbs, key=lambda p: p.id):
        tro = sorted({trolley_solution.assignment[c] for c in p.required
                      if c in trolley_solution.assignment})
        sta = sorted({stacker_solution.assignment[c] for c in p.required
                      if c in stacker_solution.assignment})
        pulls[p.id] = (tuple(tro), tuple(sta))
    return LoadingPlan(tuple(containers), pulls, len(trolley_solution.used), len(stacker_solution.used))
