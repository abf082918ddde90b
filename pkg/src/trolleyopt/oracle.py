"""Reference checker and exhaustive optimiser for small subproblems.

Nothing in here shares code with the search in :mod:`trolleyopt.exact`; the
point of this module is to be an independent second opinion.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .core import Solution, Status, Subproblem, Violation

DEFAULT_ORACLE_CAP = 10


class OracleTooLarge(ValueError):
    pass


def _pairs(sol) -> list[tuple[str, int]]:
    if isinstance(sol, Solution):
        return list(sol.assignment.items())
    if isinstance(sol, Mapping):
        return list(sol.items())
    return [(str(i), int(t)) for i, t in sol]


def check_feasible(subp: Subproblem, sol) -> list[Violation]:
    """List every broken loading rule for ``sol`` on ``subp``.

    ``sol`` may be a :class:`Solution`, a mapping item -> container, or an
    iterable of ``(item, container)`` pairs (which can express duplicates).
    """
    out: list[Violation] = []
    sizes = dict(subp.items)
    pairs = _pairs(sol)

    where: dict[str, list[int]] = {}
    for item, t in pairs:
        where.setdefault(item, []).append(t)

    for item in sizes:
        homes = where.get(item, [])
        if not homes:
            out.append(Violation("missing assignment", item, "item is not assigned"))
        elif len(homes) > 1:
            out.append(Violation("duplicate assignment", item,
                                 f"assigned {len(homes)} times: {sorted(homes)}"))
    for item in sorted(set(where) - set(sizes)):
        out.append(Violation("unknown item", item, "assigned item not in subproblem"))

    load: dict[int, int] = {}
    for item, t in pairs:
        if not 1 <= t <= subp.max_containers:
            out.append(Violation("container out of range", item,
                                 f"container {t} outside 1..{subp.max_containers}"))
        if item in sizes:
            load[t] = load.get(t, 0) + sizes[item]
    for t in sorted(load):
        if load[t] > subp.capacity:
            out.append(Violation("capacity overflow", str(t),
                                 f"overflow {load[t] - subp.capacity} "
                                 f"(load {load[t]} > capacity {subp.capacity})"))

    for p in sorted(subp.pcb_groups):
        spread = {t for item, t in pairs if item in subp.pcb_groups[p]}
        limit = subp.limits.get(p, 0)
        if len(spread) > limit:
            out.append(Violation("spread overflow", p,
                                 f"spans {len(spread)} containers {sorted(spread)}, limit {limit}"))

    if isinstance(sol, Solution):
        used = {t for _, t in pairs}
        if sol.objective != len(used):
            out.append(Violation("objective mismatch", "objective",
                                 f"objective {sol.objective} != {len(used)} used containers"))
    return out


def canonical_assignments(n_items: int, max_containers: int):
    """Yield container vectors in first-touch form (restricted growth strings).

    Item ``k`` may only use containers ``1..min(m + 1, max_containers)`` where
    ``m`` is the highest index used by items before it.
    """
    if n_items == 0:
        yield ()
        return
    if max_containers < 1:
        return
    vec = [0] * n_items

    def rec(k: int, m: int):
        if k == n_items:
            yield tuple(vec)
            return
        for t in range(1, min(m + 1, max_containers) + 1):
            vec[k] = t
            yield from rec(k + 1, max(m, t))

    yield from rec(0, 0)


@dataclass(frozen=True)
class OracleResult:
    status: Status
    objective: int | None
    witness: Solution | None
    enumerated: int


def brute_force_optimum(subp: Subproblem, cap: int = DEFAULT_ORACLE_CAP) -> OracleResult:
    n = len(subp.items)
    if cap is not None and n > cap:
        raise OracleTooLarge(f"{n} items exceeds oracle cap {cap}")
    ids = [i for i, _ in subp.items]
    best = None
    count = 0
    for vec in canonical_assignments(n, subp.max_containers):
        count += 1
        k = max(vec, default=0)
        if best is not None and k >= best[0]:
            continue
        assignment = dict(zip(ids, vec))
        if not check_feasible(subp, assignment):
            best = (k, assignment)
    if best is None:
        return OracleResult(Status.INFEASIBLE, None, None, count)
    witness = Solution.from_assignment(subp, best[1], solver="oracle", status=Status.OPTIMAL)
    return OracleResult(Status.OPTIMAL, best[0], witness, count)


@dataclass(frozen=True)
class BppInstance:
    sizes: tuple
    capacity: int
    k: int

    def __init__(self, sizes: Iterable[int], capacity: int, k: int):
        sizes = tuple(int(s) for s in sizes)
        if capacity < 1 or k < 1:
            raise ValueError("capacity and k must be positive")
        if any(s < 1 or s > capacity for s in sizes):
            raise ValueError("every size must lie in 1..capacity")
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "capacity", capacity)
        object.__setattr__(self, "k", k)


def reduce_bpp_to_top(bpp: BppInstance) -> Subproblem:
    """Embed a bin packing decision instance as a one-PCB subproblem with limit k."""
    items = [(f"i{n + 1}", s) for n, s in enumerate(bpp.sizes)]
    group = {"bpp": [i for i, _ in items]}
    return Subproblem(items, bpp.capacity, bpp.k, group, {"bpp": bpp.k})


def bpp_decide_exhaustive(bpp: BppInstance) -> bool:
    """Plain backtracking over all k**n bin choices; no symmetry reduction."""
    loads = [0] * bpp.k
    sizes = bpp.sizes

    def place(n: int) -> bool:
        if n == len(sizes):
            return True
        for b in range(bpp.k):
            if loads[b] + sizes[n] <= bpp.capacity:
                loads[b] += sizes[n]
                if place(n + 1):
                    return True
                loads[b] -= sizes[n]
        return False

    return place(0)


def bpp_decide_via_top(bpp: BppInstance, solve=None) -> bool:
    """Decide the bin packing question through the reduction.

    ``solve`` maps a subproblem to an objective (or ``None`` when infeasible);
    the brute-force optimiser is used when it is omitted.
    """
    subp = reduce_bpp_to_top(bpp)
    if solve is None:
        res = brute_force_optimum(subp, cap=None)
        objective = res.objective
    else:
        objective = solve(subp)
    return objective is not None and objective <= bpp.k
