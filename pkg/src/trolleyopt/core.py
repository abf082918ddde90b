"""Domain types for trolley/stacker loading problems.

An :class:`Instance` describes the whole line (both container kinds).  A
:class:`Subproblem` is the single-kind packing problem that every solver in
this package works on: items with slot sizes, a container capacity, a global
container budget and a per-PCB cap on how many containers a PCB may span.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping


class ContainerClass(str, enum.Enum):
    TROLLEY = "trolley"
    STACKER = "stacker"


class Status(str, enum.Enum):
    OPTIMAL = "optimal"
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    LIMIT_REACHED = "limit_reached"


@dataclass(frozen=True)
class ComponentSpec:
    id: str
    size: int
    cls: ContainerClass = ContainerClass.TROLLEY


@dataclass(frozen=True)
class PcbSpec:
    id: str
    required: frozenset

    def __init__(self, id: str, required: Iterable[str]):
        object.__setattr__(self, "id", id)
        object.__setattr__(self, "required", frozenset(required))


@dataclass(frozen=True)
class LineConfig:
    container_positions: int = 16
    trolley_capacity: int = 33
    stacker_capacity: int = 30
    max_trolleys: int = 28
    max_stackers: int = 2


@dataclass(frozen=True)
class Instance:
    components: tuple
    pcbs: tuple
    line: LineConfig = field(default_factory=LineConfig)

    def __init__(self, components: Iterable[ComponentSpec], pcbs: Iterable[PcbSpec],
                 line: LineConfig | None = None):
        object.__setattr__(self, "components", tuple(components))
        object.__setattr__(self, "pcbs", tuple(pcbs))
        object.__setattr__(self, "line", line if line is not None else LineConfig())

    def component(self, cid: str) -> ComponentSpec:
        for c in self.components:
            if c.id == cid:
                return c
        raise KeyError(f"unknown component {cid!r}")

    def pcb(self, pid: str) -> PcbSpec:
        for p in self.pcbs:
            if p.id == pid:
                return p
        raise KeyError(f"unknown PCB {pid!r}")

    def capacity_of(self, cls: ContainerClass) -> int:
        if cls is ContainerClass.TROLLEY:
            return self.line.trolley_capacity
        return self.line.stacker_capacity


@dataclass(frozen=True)
class Violation:
    """One broken invariant; ``kind`` is a stable machine-readable tag."""

    kind: str
    subject: str
    detail: str

    def __str__(self) -> str:
        return f"{self.kind} [{self.subject}]: {self.detail}"


# validation ordering: by type, then id
_TYPE_ORDER = {"line": 0, "component": 1, "pcb": 2}


def validate_instance(inst: Instance) -> list[Violation]:
    """Return every violated instance invariant; an empty list means valid."""
    found: list[tuple[int, str, int, Violation]] = []

    def add(typ: str, subject: str, kind: str, detail: str) -> None:
        found.append((_TYPE_ORDER[typ], subject, len(found), Violation(kind, subject, detail)))

    line = inst.line
    for name in ("container_positions", "trolley_capacity", "stacker_capacity", "max_trolleys"):
        value = getattr(line, name)
        if not isinstance(value, int) or value < 1:
            add("line", name, "invalid line config", f"{name} must be a positive integer, got {value!r}")
    if not isinstance(line.max_stackers, int) or line.max_stackers < 0:
        add("line", "max_stackers", "invalid line config",
            f"max_stackers must be a non-negative integer, got {line.max_stackers!r}")

    seen: dict[str, int] = {}
    for c in inst.components:
        seen[c.id] = seen.get(c.id, 0) + 1
    for cid, n in seen.items():
        if n > 1:
            add("component", cid, "duplicate component id", f"component {cid!r} defined {n} times")

    referenced: set[str] = set()
    for p in inst.pcbs:
        referenced |= p.required

    for c in inst.components:
        if not isinstance(c.size, int) or c.size < 1:
            add("component", c.id, "invalid component size", f"size must be >= 1, got {c.size!r}")
            continue
        cap = inst.capacity_of(c.cls)
        if c.size > cap:
            add("component", c.id, f"component exceeds {c.cls.value} capacity",
                f"size {c.size} > {c.cls.value} capacity {cap}")
        if c.id not in referenced:
            add("component", c.id, "unreferenced component", "no PCB requires this component")

    pcount: dict[str, int] = {}
    for p in inst.pcbs:
        pcount[p.id] = pcount.get(p.id, 0) + 1
    for pid, n in pcount.items():
        if n > 1:
            add("pcb", pid, "duplicate pcb id", f"PCB {pid!r} defined {n} times")
    for p in inst.pcbs:
        if not p.required:
            add("pcb", p.id, "empty pcb", "PCB requires no components")
        for cid in sorted(p.required - seen.keys()):
            add("pcb", p.id, "dangling component reference", f"unknown component {cid!r}")

    found.sort(key=lambda t: (t[0], t[1], t[2]))
    return [v for *_, v in found]


def pcb_slot_demand(inst: Instance, pcb_id: str, cls: ContainerClass) -> int:
    pcb = inst.pcb(pcb_id)
    sizes = {c.id: c for c in inst.components}
    return sum(sizes[cid].size for cid in pcb.required if sizes[cid].cls is cls)


def count_variables(n_items: int, n_containers: int, n_pcbs: int) -> int:
    """Binary variables in the assignment model: x (item, container), y, z (pcb, container)."""
    return n_items * n_containers + n_containers + n_pcbs * n_containers


@dataclass(frozen=True)
class Subproblem:
    """Single-kind packing problem with per-PCB container limits.

    ``items`` is a tuple of ``(item id, size)`` pairs; ``pcb_groups`` maps PCB
    id to the item ids it requires and ``limits`` maps PCB id to the maximum
    number of containers those items may span.
    """

    items: tuple
    capacity: int
    max_containers: int
    pcb_groups: Mapping[str, frozenset]
    limits: Mapping[str, int]

    def __init__(self, items, capacity: int, max_containers: int,
                 pcb_groups: Mapping[str, Iterable[str]], limits: Mapping[str, int]):
        object.__setattr__(self, "items", tuple((str(i), int(s)) for i, s in items))
        object.__setattr__(self, "capacity", capacity)
        object.__setattr__(self, "max_containers", max_containers)
        object.__setattr__(self, "pcb_groups",
                           {str(p): frozenset(g) for p, g in pcb_groups.items()})
        object.__setattr__(self, "limits", {str(p): int(v) for p, v in limits.items()})

    def __hash__(self) -> int:
        return hash((self.items, self.capacity, self.max_containers,
                     tuple(sorted(self.pcb_groups.items(), key=lambda kv: kv[0]))))

    @property
    def sizes(self) -> dict[str, int]:
        return dict(self.items)

    def total_size(self) -> int:
        return sum(s for _, s in self.items)

    def pcbs_of(self) -> dict[str, list[str]]:
        """Item id -> PCB ids requiring it, PCBs in sorted order."""
        out: dict[str, list[str]] = {i: [] for i, _ in self.items}
        for p in sorted(self.pcb_groups):
            for i in self.pcb_groups[p]:
                if i in out:
                    out[i].append(p)
        return out

    def group_demand(self, pcb_id: str) -> int:
        sizes = self.sizes
        return sum(sizes[i] for i in self.pcb_groups[pcb_id])

    def with_limits(self, limits: Mapping[str, int]) -> "Subproblem":
        return Subproblem(self.items, self.capacity, self.max_containers, self.pcb_groups, limits)

    def with_max_containers(self, max_containers: int) -> "Subproblem":
        return Subproblem(self.items, self.capacity, max_containers, self.pcb_groups, self.limits)


def variable_count(subp: Subproblem, n_pcbs: int | None = None) -> int:
    if n_pcbs is None:
        n_pcbs = len(subp.pcb_groups)
    return count_variables(len(subp.items), subp.max_containers, n_pcbs)


def subproblem_issues(subp: Subproblem) -> list[Violation]:
    """Structural problems that make ``subp`` unusable as solver input."""
    issues: list[Violation] = []
    if subp.capacity < 1:
        issues.append(Violation("invalid capacity", "capacity", f"capacity {subp.capacity} < 1"))
    if subp.max_containers < 0:
        issues.append(Violation("invalid container budget", "max_containers",
                                f"max_containers {subp.max_containers} < 0"))
    ids = [i for i, _ in subp.items]
    if len(set(ids)) != len(ids):
        issues.append(Violation("duplicate item id", "items", "item ids are not unique"))
    for i, s in subp.items:
        if s < 1 or s > subp.capacity:
            issues.append(Violation("invalid item size", i, f"size {s} outside 1..{subp.capacity}"))
    known = set(ids)
    covered: set[str] = set()
    for p in sorted(subp.pcb_groups):
        group = subp.pcb_groups[p]
        covered |= group
        for i in sorted(group - known):
            issues.append(Violation("dangling item reference", p, f"unknown item {i!r}"))
        if p not in subp.limits:
            issues.append(Violation("missing limit", p, "no container limit for PCB"))
            continue
        lim = subp.limits[p]
        # an empty group never touches a container, so a zero limit is harmless there
        low = 1 if group else 0
        if lim < low or lim > subp.max_containers:
            issues.append(Violation("invalid limit", p,
                                    f"limit {lim} outside {low}..{subp.max_containers}"))
    for p in sorted(set(subp.limits) - set(subp.pcb_groups)):
        issues.append(Violation("dangling limit", p, "limit given for unknown PCB"))
    for i in ids:
        if i not in covered:
            issues.append(Violation("uncovered item", i, "item required by no PCB"))
    return issues


def demand_infeasibilities(subp: Subproblem) -> list[Violation]:
    """PCBs whose slot demand cannot fit within their container limit."""
    out = []
    for p in sorted(subp.pcb_groups):
        need = math.ceil(subp.group_demand(p) / subp.capacity)
        if need > subp.limits.get(p, 0):
            out.append(Violation("pcb demand exceeds limit", p,
                                 f"needs at least {need} containers, limit {subp.limits.get(p)}"))
    return out


class InvalidSubproblem(ValueError):
    def __init__(self, issues: list[Violation]):
        self.issues = issues
        super().__init__("; ".join(str(v) for v in issues))


def require_valid(subp: Subproblem) -> None:
    issues = subproblem_issues(subp)
    if issues:
        raise InvalidSubproblem(issues)


@dataclass(frozen=True)
class Solution:
    """Item -> container assignment (containers numbered from 1) plus derived sets."""

    assignment: Mapping[str, int]
    used: frozenset
    pcb_spread: Mapping[str, frozenset]
    objective: int
    solver: str = "unknown"
    status: Status = Status.FEASIBLE

    @classmethod
    def from_assignment(cls, subp: Subproblem, assignment: Mapping[str, int],
                        solver: str = "unknown", status: Status = Status.FEASIBLE) -> "Solution":
        assignment = {i: int(assignment[i]) for i, _ in subp.items if i in assignment}
        used = frozenset(assignment.values())
        spread = {p: frozenset(assignment[i] for i in g if i in assignment)
                  for p, g in sorted(subp.pcb_groups.items())}
        return cls(assignment, used, spread, len(used), solver, status)

    def with_status(self, solver: str, status: Status) -> "Solution":
        return Solution(self.assignment, self.used, self.pcb_spread, self.objective, solver, status)

    def loads(self, subp: Subproblem) -> dict[int, int]:
        sizes = subp.sizes
        out: dict[int, int] = {}
        for i, t in self.assignment.items():
            out[t] = out.get(t, 0) + sizes[i]
        return dict(sorted(out.items()))
