import random

import pytest
from hypothesis import given, settings, strategies as st

from trolleyopt.core import Solution, Subproblem
from trolleyopt.heuristics import (PackingFailure, RepairFailure, best_greedy, bounds,
                                   greedy_pack, l2_bound, lower_bound, order_items, repair)
from trolleyopt.oracle import brute_force_optimum, check_feasible

from .strategies import random_subproblem


def one_pcb(sizes, cap, T, limit):
    items = [(f"i{k}", s) for k, s in enumerate(sizes)]
    return Subproblem(items, cap, T, {"p": [i for i, _ in items]}, {"p": limit})


@pytest.mark.parametrize("sizes,cap,expected", [
    ([33, 33, 33], 33, 3),
    ([17, 17, 17], 33, 3),
    ([5, 5, 5], 10, 2),
    ([6, 6, 6, 6], 12, 2),
    ([], 33, 0),
])
def test_lower_bound_examples(sizes, cap, expected):
    assert lower_bound(one_pcb(sizes, cap, max(len(sizes), 1), max(len(sizes), 1))) == expected


def test_l2_beats_l1_on_big_items():
    # four items just over half: L1 says 3, but no two share a bin
    assert l2_bound([7, 7, 7, 7], 12) == 4


def best_bin_count(sizes, cap):
    """Exhaustive bin count for a plain bin packing instance."""
    best = len(sizes)

    def rec(k, loads):
        nonlocal best
        if len(loads) >= best:
            return
        if k == len(sizes):
            best = len(loads)
            return
        for b in range(len(loads)):
            if loads[b] + sizes[k] <= cap:
                loads[b] += sizes[k]
                rec(k + 1, loads)
                loads[b] -= sizes[k]
        loads.append(sizes[k])
        rec(k + 1, loads)
        loads.pop()

    rec(0, [])
    return best


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 15).flatmap(
    lambda cap: st.tuples(st.just(cap), st.lists(st.integers(1, cap), min_size=1, max_size=8))))
def test_bounds_never_exceed_optimum(case):
    cap, sizes = case
    b = bounds(one_pcb(sizes, cap, len(sizes), len(sizes)))
    assert b.lower <= best_bin_count(sizes, cap)
    assert b.lower >= -(-sum(sizes) // cap)


def test_lower_bound_below_random_optimum():
    rng = random.Random(21)
    for _ in range(200):
        sp = random_subproblem(rng)
        res = brute_force_optimum(sp)
        if res.objective is not None:
            assert lower_bound(sp) <= res.objective


def test_greedy_toy():
    sol = greedy_pack(one_pcb([5, 5, 5], 10, 3, 2))
    assert sol.objective == 2
    assert sol.assignment == {"i0": 1, "i1": 1, "i2": 2}


def test_greedy_fails_on_forced_limit():
    with pytest.raises(PackingFailure) as err:
        greedy_pack(one_pcb([5, 5, 5], 10, 3, 1))
    assert err.value.pcb == "p" and err.value.item == "i2"


def test_greedy_budget_exhausted():
    with pytest.raises(PackingFailure, match="budget"):
        greedy_pack(one_pcb([6, 6, 6], 10, 2, 2))


def test_default_order_ties_on_pcb_usage():
    sp = Subproblem([("a", 2), ("b", 2), ("c", 3)], 10, 3,
                    {"p": ["a", "b", "c"], "q": ["b"]}, {"p": 3, "q": 3})
    assert order_items(sp) == ["c", "b", "a"]


def test_greedy_deterministic():
    rng = random.Random(2)
    sp = random_subproblem(rng, max_items=8, tight=False)
    assert greedy_pack(sp) == greedy_pack(sp)


def test_spread_placement_keeps_pcb_together():
    # first fit drops q's 1-slot item on container 1 and q runs out of containers
    sp = Subproblem([("x1", 8), ("x2", 6), ("y1", 3), ("y2", 1), ("y3", 2)], 10, 3,
                    {"p": ["x1"], "r": ["x2"], "q": ["y1", "y2", "y3"]},
                    {"p": 1, "r": 1, "q": 2})
    with pytest.raises(PackingFailure) as err:
        greedy_pack(sp, "input", "first")
    assert (err.value.item, err.value.pcb) == ("y3", "q")
    sol = greedy_pack(sp, "input", "spread")
    assert check_feasible(sp, sol) == []
    assert sol.assignment["y2"] == 2


def test_greedy_sound_and_never_beats_optimum():
    rng = random.Random(99)
    seen_equal = False
    for _ in range(300):
        sp = random_subproblem(rng)
        res = brute_force_optimum(sp)
        try:
            sol = greedy_pack(sp)
        except PackingFailure:
            continue
        assert check_feasible(sp, sol) == []
        assert res.objective is not None and sol.objective >= res.objective
        seen_equal |= sol.objective == res.objective
    assert seen_equal
    assert best_greedy(one_pcb([5, 5, 5], 10, 3, 1)) is None


def repair_case():
    sp = Subproblem([("a", 5), ("b", 5), ("c", 1), ("d", 6)], 10, 3,
                    {"p": ["a", "b", "c"], "q": ["d"]}, {"p": 2, "q": 1})
    return sp, {"a": 1, "b": 2, "c": 3, "d": 3}


def test_repair_moves_small_item():
    sp, draft = repair_case()
    fixed = repair(sp, draft)
    assert fixed.assignment["c"] == 1
    assert fixed.pcb_spread["p"] == {1, 2}
    assert check_feasible(sp, fixed) == []


def test_repair_noop_on_feasible():
    sp, draft = repair_case()
    draft["c"] = 1
    sol = Solution.from_assignment(sp, draft)
    assert repair(sp, sol) is sol


def test_repair_fails_when_full():
    sp = one_pcb([10, 10, 10], 10, 3, 2)
    with pytest.raises(RepairFailure):
        repair(sp, {"i0": 1, "i1": 2, "i2": 3})


def test_repair_rejects_capacity_violations():
    sp = one_pcb([6, 6], 10, 2, 1)
    with pytest.raises(ValueError):
        repair(sp, {"i0": 1, "i1": 1})


def test_repair_results_always_feasible():
    rng = random.Random(8)
    repaired = 0
    for _ in range(400):
        sp = random_subproblem(rng)
        draft = {i: rng.randint(1, sp.max_containers) for i, _ in sp.items}
        kinds = {v.kind for v in check_feasible(sp, draft)}
        if kinds != {"spread overflow"}:
            continue
        try:
            sol = repair(sp, draft)
        except RepairFailure:
            continue
        assert check_feasible(sp, sol) == []
        repaired += 1
    assert repaired > 0
