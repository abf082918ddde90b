"""Incumbents and lower bounds for :class:`~trolleyopt.core.Subproblem`."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .core import Solution, Status, Subproblem
from .oracle import check_feasible


@dataclass(frozen=True)
class Bound:
    lower: int
    upper: int | None = None
    certificates: tuple = field(default_factory=tuple)


def l1_bound(sizes: Sequence[int], capacity: int) -> int:
    return math.ceil(sum(sizes) / capacity) if sizes else 0


def l2_bound(sizes: Sequence[int], capacity: int) -> int:
    """Martello-Toth L2: big items each need a bin, small ones fill leftover space."""
    if not sizes:
        return 0
    best = 0
    # only thresholds equal to an item size (or 0) can change the partition
    thresholds = {0} | {s for s in sizes if 2 * s <= capacity}
    for k in sorted(thresholds):
        j1 = [s for s in sizes if s > capacity - k]
        j2 = [s for s in sizes if capacity - k >= s and 2 * s > capacity]
        j3 = [s for s in sizes if 2 * s <= capacity and s >= k]
        free = len(j2) * capacity - sum(j2)
        extra = max(0, math.ceil((sum(j3) - free) / capacity))
        best = max(best, len(j1) + len(j2) + extra)
    return best


def bounds(subp: Subproblem, upper: int | None = None) -> Bound:
    sizes = [s for _, s in subp.items]
    l1 = l1_bound(sizes, subp.capacity)
    l2 = l2_bound(sizes, subp.capacity)
    lower = max(l1, l2)
    certs = tuple(name for name, v in (("L1", l1), ("L2", l2)) if v == lower and lower > 0)
    return Bound(lower, upper, certs)


def lower_bound(subp: Subproblem) -> int:
    return bounds(subp).lower


class PackingFailure(Exception):
    def __init__(self, item: str, pcb: str | None, reason: str):
        self.item = item
        self.pcb = pcb
        self.reason = reason
        where = f" (blocked by PCB {pcb})" if pcb is not None else ""
        super().__init__(f"cannot place item {item}{where}: {reason}")


def _usage(subp: Subproblem) -> dict[str, int]:
    return {i: len(ps) for i, ps in subp.pcbs_of().items()}


def order_items(subp: Subproblem, policy: str = "ffd") -> list[str]:
    """Item ids in placement order.

    ``ffd``: size desc, then number of PCBs needing the item desc, then id.
    ``usage``: PCB count desc, then size desc, then id.
    ``cluster``: PCB by PCB (largest slot demand first), each PCB's not yet
    placed items size desc; items no PCB needs go last.
    ``input``: as listed.
    """
    sizes = dict(subp.items)
    if policy == "input":
        return [i for i, _ in subp.items]
    if policy == "cluster":
        out: list[str] = []
        seen: set[str] = set()
        for p in sorted(subp.pcb_groups, key=lambda p: (-subp.group_demand(p), p)):
            for i in sorted(subp.pcb_groups[p] - seen, key=lambda i: (-sizes[i], i)):
                out.append(i)
                seen.add(i)
        out += sorted((i for i in sizes if i not in seen), key=lambda i: (-sizes[i], i))
        return out
    usage = _usage(subp)
    if policy == "ffd":
        return sorted(sizes, key=lambda i: (-sizes[i], -usage[i], i))
    if policy == "usage":
        return sorted(sizes, key=lambda i: (-usage[i], -sizes[i], i))
    raise ValueError(f"unknown order policy {policy!r}")


POLICIES = ("ffd", "usage", "cluster", "input")


def greedy_pack(subp: Subproblem, policy: str = "ffd", placement: str = "first") -> Solution:
    """First fit honouring capacity and per-PCB spread limits.

    With ``placement="spread"`` the containers already spanned by the item's
    PCBs are tried first (most shared first), then the rest in index order.
    Raises :class:`PackingFailure` naming the first item that has nowhere to go.
    """
    if placement not in ("first", "spread"):
        raise ValueError(f"unknown placement rule {placement!r}")
    sizes = dict(subp.items)
    pcbs_of = subp.pcbs_of()
    residual: list[int] = []
    spread: dict[str, set[int]] = {p: set() for p in subp.pcb_groups}
    assignment: dict[str, int] = {}

    for item in order_items(subp, policy):
        size = sizes[item]
        blocker = None
        placed = False
        candidates = range(1, len(residual) + 1)
        if placement == "spread":
            share = {}
            for p in pcbs_of[item]:
                for t in spread[p]:
                    share[t] = share.get(t, 0) + 1
            candidates = sorted(candidates, key=lambda t: (-share.get(t, 0), t))
        for t in candidates:
            if residual[t - 1] < size:
                continue
            over = next((p for p in pcbs_of[item]
                         if t not in spread[p] and len(spread[p]) >= subp.limits[p]), None)
            if over is not None:
                blocker = blocker or over
                continue
            residual[t - 1] -= size
            assignment[item] = t
            placed = True
            break
        if not placed:
            over = next((p for p in pcbs_of[item] if len(spread[p]) >= subp.limits[p]), None)
            if len(residual) >= subp.max_containers:
                raise PackingFailure(item, blocker or over, "container budget exhausted")
            if over is not None:
                raise PackingFailure(item, over, "PCB container limit reached")
            residual.append(subp.capacity - size)
            assignment[item] = len(residual)
        t = assignment[item]
        for p in pcbs_of[item]:
            spread[p].add(t)

    name = f"greedy:{policy}" if placement == "first" else f"greedy:{policy}/{placement}"
    return Solution.from_assignment(subp, assignment, solver=name, status=Status.FEASIBLE)


def best_greedy(subp: Subproblem, policies: Sequence[str] = POLICIES,
                placements: Sequence[str] = ("first", "spread")) -> Solution | None:
    """Run every policy/placement pair; keep the lowest objective, ties to the earlier pair."""
    best = None
    for policy, placement in itertools.product(policies, placements):
        try:
            sol = greedy_pack(subp, policy, placement)
        except PackingFailure:
            continue
        if best is None or sol.objective < best.objective:
            best = sol
    return best


class RepairFailure(Exception):
    def __init__(self, pcb: str, reason: str):
        self.pcb = pcb
        super().__init__(f"cannot repair PCB {pcb}: {reason}")


def repair(subp: Subproblem, draft: Solution | Mapping[str, int]) -> Solution:
    """Pull over-spread PCBs back within their limits by moving items.

    For each violating PCB, try to empty its least-loaded containers (with
    respect to that PCB's items) into containers it already spans.  A move is
    only accepted if capacity holds and no other PCB is pushed over its limit.
    One pass per violating PCB; raises :class:`RepairFailure` otherwise.
    """
    assignment = dict(draft.assignment if isinstance(draft, Solution) else draft)
    problems = check_feasible(subp, assignment)
    if not problems:
        if isinstance(draft, Solution):
            return draft
        return Solution.from_assignment(subp, assignment, solver="repair")
    if any(v.kind != "spread overflow" for v in problems):
        raise ValueError("repair only handles spread violations: "
                         + "; ".join(str(v) for v in problems if v.kind != "spread overflow"))

    sizes = dict(subp.items)
    pcbs_of = subp.pcbs_of()
    load: dict[int, int] = {}
    for i, t in assignment.items():
        load[t] = load.get(t, 0) + sizes[i]

    def spread_of(p: str) -> set[int]:
        return {assignment[i] for i in subp.pcb_groups[p]}

    for p in sorted(subp.pcb_groups):
        if len(spread_of(p)) <= subp.limits[p]:
            continue
        progress = True
        while len(spread_of(p)) > subp.limits[p] and progress:
            progress = False
            span = spread_of(p)
            p_load = {t: sum(sizes[i] for i in subp.pcb_groups[p] if assignment[i] == t) for t in span}
            for src in sorted(span, key=lambda t: (p_load[t], t)):
                movers = sorted((i for i in subp.pcb_groups[p] if assignment[i] == src),
                                key=lambda i: (-sizes[i], i))
                trial = dict(assignment)
                trial_load = dict(load)
                ok = True
                for i in movers:
                    dest = None
                    for t in sorted(span - {src}):
                        if trial_load[t] + sizes[i] > subp.capacity:
                            continue
                        before = {q: len({trial[j] for j in subp.pcb_groups[q]}) for q in pcbs_of[i]}
                        trial[i] = t
                        # other PCBs may not get worse than max(limit, current spread)
                        if all(q == p or len({trial[j] for j in subp.pcb_groups[q]})
                               <= max(subp.limits[q], before[q]) for q in pcbs_of[i]):
                            dest = t
                            break
                        trial[i] = src
                    if dest is None:
                        ok = False
                        break
                    trial_load[src] -= sizes[i]
                    trial_load[dest] += sizes[i]
                if ok:
                    assignment, load = trial, trial_load
                    progress = True
                    break
        if len(spread_of(p)) > subp.limits[p]:
            raise RepairFailure(p, "no container of its span can be emptied into the others")

    if check_feasible(subp, assignment):
        raise RepairFailure(sorted(subp.pcb_groups)[0] if subp.pcb_groups else "",
                            "repaired draft still infeasible")
    return Solution.from_assignment(subp, assignment, solver="repair")
