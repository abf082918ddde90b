"""Branch-and-bound for spread-limited bin packing.

Items are branched in a fixed order (the greedy ``ffd`` order) over the
containers already open plus, at most, one fresh container.  A child is only
created when it respects capacity and every affected PCB's container limit,
and when its lower bound still beats the incumbent.
"""

from __future__ import annotations

import bisect
import math
import time
from dataclasses import dataclass, field
from typing import Callable

from .core import Solution, Status, Subproblem, demand_infeasibilities, require_valid
from .heuristics import best_greedy, lower_bound, order_items


@dataclass(frozen=True)
class SolverConfig:
    time_limit: float | None = None
    node_limit: int | None = None
    use_incumbent: bool = True
    symmetry_breaking: bool = True
    log_every: int = 10_000

    def __post_init__(self):
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError("time_limit must be positive")
        if self.node_limit is not None and self.node_limit <= 0:
            raise ValueError("node_limit must be positive")
        if self.log_every <= 0:
            raise ValueError("log_every must be positive")


@dataclass(frozen=True)
class ProgressEvent:
    nodes: int
    incumbent: int | None
    bound: int | None
    elapsed: float


@dataclass
class SolveReport:
    status: Status
    best: Solution | None
    bound: int | None
    nodes: int
    elapsed: float
    # (nodes, objective) each time the incumbent improved
    history: list = field(default_factory=list)
    reason: str = ""

    @property
    def objective(self) -> int | None:
        return self.best.objective if self.best is not None else None


class _LimitHit(Exception):
    pass


def solve(subp: Subproblem, cfg: SolverConfig | None = None,
          on_progress: Callable[[ProgressEvent], None] | None = None) -> SolveReport:
    cfg = cfg or SolverConfig()
    require_valid(subp)
    start = time.perf_counter()

    blocked = demand_infeasibilities(subp)
    if blocked:
        return SolveReport(Status.INFEASIBLE, None, None, 0, time.perf_counter() - start,
                           reason=str(blocked[0]))
    n = len(subp.items)
    if n == 0:
        sol = Solution.from_assignment(subp, {}, solver="bnb", status=Status.OPTIMAL)
        return SolveReport(Status.OPTIMAL, sol, 0, 0, time.perf_counter() - start)

    root_bound = lower_bound(subp)
    T = subp.max_containers
    if root_bound > T:
        return SolveReport(Status.INFEASIBLE, None, None, 0, time.perf_counter() - start,
                           reason=f"needs at least {root_bound} containers, budget {T}")

    cap = subp.capacity
    sizes_by_id = dict(subp.items)
    ids = order_items(subp, "ffd")
    size = [sizes_by_id[i] for i in ids]
    pcb_names = sorted(subp.pcb_groups)
    pidx = {p: j for j, p in enumerate(pcb_names)}
    owners = subp.pcbs_of()
    pcbs = [[pidx[p] for p in owners[i]] for i in ids]
    limit = [subp.limits[p] for p in pcb_names]

    neg = [-s for s in size]
    prefix = [0]
    for s in size:
        prefix.append(prefix[-1] + s)
    n_big = bisect.bisect_left(neg, -(cap // 2))
    # items interchangeable with their predecessor in the branching order
    twin = [k > 0 and size[k] == size[k - 1] and owners[ids[k]] == owners[ids[k - 1]]
            for k in range(n)]

    load = [0] * T
    cnt = [[0] * T for _ in pcb_names]
    spread = [0] * len(pcb_names)
    rem_p = [subp.group_demand(p) for p in pcb_names]
    where = [-1] * n

    incumbent: Solution | None = None
    best_obj = T + 1
    history: list[tuple[int, int]] = []
    if cfg.use_incumbent:
        seed = best_greedy(subp)
        if seed is not None:
            incumbent, best_obj = seed, seed.objective
            history.append((0, best_obj))

    nodes = 0
    used = 0

    def elapsed() -> float:
        return time.perf_counter() - start

    def bound_after(d: int) -> int:
        """Lower bound on containers once items ``0..d`` are placed."""
        if used:
            max_res = cap - min(load[:used]) if cfg.symmetry_breaking else \
                max(cap - x for x in load if x)
            free = used * cap - sum(load)
        else:
            max_res = 0
            free = 0
        lo = d + 1
        rem = prefix[n] - prefix[lo]
        fill = max(0, math.ceil((rem - free) / cap))
        j = bisect.bisect_left(neg, -max_res, lo=lo)
        forced = math.ceil((prefix[j] - prefix[lo]) / cap)
        bigs = max(0, min(j, n_big) - lo)
        return used + max(fill, forced, bigs)

    def pcb_ok(k: int) -> bool:
        for j in pcbs[k]:
            left = rem_p[j]
            if not left:
                continue
            if spread[j] + math.ceil(left / cap) <= limit[j]:
                continue
            row = cnt[j]
            res = 0
            for t in range(T):
                if row[t]:
                    res += cap - load[t]
            need = max(0, math.ceil((left - res) / cap))
            if spread[j] + need > limit[j]:
                return False
        return True

    def place(k: int, t: int) -> None:
        nonlocal used
        s = size[k]
        if load[t] == 0:
            used += 1
        load[t] += s
        where[k] = t
        for j in pcbs[k]:
            row = cnt[j]
            if row[t] == 0:
                spread[j] += 1
            row[t] += 1
            rem_p[j] -= s

    def unplace(k: int) -> None:
        nonlocal used
        t = where[k]
        s = size[k]
        load[t] -= s
        if load[t] == 0:
            used -= 1
        where[k] = -1
        for j in pcbs[k]:
            row = cnt[j]
            row[t] -= 1
            if row[t] == 0:
                spread[j] -= 1
            rem_p[j] += s

    def first_candidate(k: int) -> int:
        if cfg.symmetry_breaking and twin[k]:
            return where[k - 1]
        return 0

    status = None
    reason = ""
    try:
        if best_obj <= root_bound:
            status = Status.OPTIMAL
        else:
            d = 0
            nxt = [0] * (n + 1)
            nxt[0] = first_candidate(0)
            while d >= 0:
                if d == n:
                    # every item placed: new incumbent (bound pruning guarantees improvement)
                    assignment = {ids[k]: where[k] + 1 for k in range(n)}
                    incumbent = Solution.from_assignment(subp, assignment, solver="bnb")
                    best_obj = incumbent.objective
                    history.append((nodes, best_obj))
                    if best_obj <= root_bound:
                        status = Status.OPTIMAL
                        break
                    d -= 1
                    nxt[d] = where[d] + 1
                    unplace(d)
                    continue
                hi = min(used + 1, T) if cfg.symmetry_breaking else T
                s = size[d]
                descended = False
                t = nxt[d]
                while t < hi:
                    if load[t] + s > cap:
                        t += 1
                        continue
                    if any(cnt[j][t] == 0 and spread[j] >= limit[j] for j in pcbs[d]):
                        t += 1
                        continue
                    place(d, t)
                    if bound_after(d) >= best_obj or not pcb_ok(d):
                        unplace(d)
                        t += 1
                        continue
                    nodes += 1
                    if nodes % cfg.log_every == 0 and on_progress is not None:
                        on_progress(ProgressEvent(nodes, best_obj if incumbent else None,
                                                  root_bound, elapsed()))
                    if (nodes & 255) == 0:
                        if cfg.time_limit is not None and elapsed() > cfg.time_limit:
                            raise _LimitHit("time limit")
                    if cfg.node_limit is not None and nodes >= cfg.node_limit:
                        raise _LimitHit("node limit")
                    descended = True
                    break
                if descended:
                    d += 1
                    if d < n:
                        nxt[d] = first_candidate(d)
                    continue
                # exhausted this level
                d -= 1
                if d >= 0:
                    nxt[d] = where[d] + 1
                    unplace(d)
            if status is None:
                status = Status.OPTIMAL if incumbent is not None else Status.INFEASIBLE
                if incumbent is None:
                    reason = "search tree exhausted without a feasible loading"
    except _LimitHit as hit:
        status = Status.LIMIT_REACHED
        reason = str(hit)

    if status is Status.OPTIMAL:
        best = incumbent.with_status("bnb", Status.OPTIMAL)
        bound = best.objective
    elif status is Status.INFEASIBLE:
        best, bound = None, None
    else:
        best = incumbent.with_status(incumbent.solver, Status.FEASIBLE) if incumbent else None
        bound = root_bound
    report = SolveReport(status, best, bound, nodes, elapsed(), history, reason)
    if on_progress is not None:
        on_progress(ProgressEvent(nodes, report.objective, bound, report.elapsed))
    return report


@dataclass
class InstanceResult:
    """Outcome of the two-stage solve: stackers first, then trolleys."""

    status: Status
    plan: object | None
    stacker: SolveReport | None
    trolley: SolveReport | None
    limits: dict | None = None
    stage: str | None = None
    blocking_pcb: str | None = None
    message: str = ""


def _merge_status(a: Status, b: Status) -> Status:
    order = [Status.INFEASIBLE, Status.LIMIT_REACHED, Status.FEASIBLE, Status.OPTIMAL]
    return min(a, b, key=order.index)


def solve_instance(inst, cfg: SolverConfig | None = None, rule="per-pcb",
                   limit_override: int | None = None,
                   on_progress: Callable[[str, ProgressEvent], None] | None = None) -> InstanceResult:
    from .decomposition import (InfeasibleLimits, build_stacker_subproblem,
                                build_trolley_subproblem, derive_trolley_limits,
                                merge_solutions)

    cfg = cfg or SolverConfig()

    def relay(stage):
        if on_progress is None:
            return None
        return lambda ev: on_progress(stage, ev)

    stacker_sub = build_stacker_subproblem(inst)
    st = solve(stacker_sub, cfg, relay("stacker"))
    if st.best is None:
        msg = st.reason or "no stacker loading found"
        return InstanceResult(st.status, None, st, None, stage="stacker", message=msg)

    try:
        limits = derive_trolley_limits(inst, st.best, rule)
    except InfeasibleLimits as err:
        return InstanceResult(Status.INFEASIBLE, None, st, None, stage="trolley",
                              blocking_pcb=err.pcb, message=str(err))
    if limit_override is not None:
        limits = {p: limit_override for p in limits}
    try:
        trolley_sub = build_trolley_subproblem(inst, limits)
    except InfeasibleLimits as err:
        return InstanceResult(Status.INFEASIBLE, None, st, None, limits, "trolley",
                              err.pcb, str(err))
    blocked = demand_infeasibilities(trolley_sub)
    if blocked:
        return InstanceResult(Status.INFEASIBLE, None, st, None, limits, "trolley",
                              blocked[0].subject, str(blocked[0]))
    tr = solve(trolley_sub, cfg, relay("trolley"))
    if tr.best is None:
        return InstanceResult(tr.status, None, st, tr, limits, "trolley",
                              message=tr.reason or "no trolley loading found")
    plan = merge_solutions(inst, tr.best, st.best)
    return InstanceResult(_merge_status(st.status, tr.status), plan, st, tr, limits)


@dataclass(frozen=True)
class SweepRow:
    limit: int
    status: Status
    objective: int | None
    stackers: int | None
    nodes: int
    elapsed: float


def sensitivity_sweep(inst, limits, cfg: SolverConfig | None = None, rule="per-pcb") -> list[SweepRow]:
    """Re-solve with every PCB's trolley limit set to each value in ``limits``."""
    limits = sorted(set(limits))
    if not limits or any(v < 1 for v in limits):
        raise ValueError("limits must be a non-empty list of positive integers")
    rows = []
    for value in limits:
        res = solve_instance(inst, cfg, rule, limit_override=value)
        nodes = sum(r.nodes for r in (res.stacker, res.trolley) if r is not None)
        elapsed = sum(r.elapsed for r in (res.stacker, res.trolley) if r is not None)
        rows.append(SweepRow(value, res.status,
                             res.plan.trolleys if res.plan else None,
                             res.plan.stackers if res.plan else None,
                             res.trolley.nodes if res.trolley else nodes, elapsed))
    return rows
