import itertools
import random

import pytest

from trolleyopt.core import Solution, Status, Subproblem
from trolleyopt.oracle import (BppInstance, OracleTooLarge, brute_force_optimum,
                               bpp_decide_exhaustive, bpp_decide_via_top,
                               canonical_assignments, check_feasible, reduce_bpp_to_top)

from .strategies import random_subproblem


def one_pcb(sizes, cap, T, limit):
    items = [(f"i{k}", s) for k, s in enumerate(sizes)]
    return Subproblem(items, cap, T, {"p": [i for i, _ in items]}, {"p": limit})


def test_capacity_overflow_reports_amount():
    sp = one_pcb([20, 20], 33, 2, 2)
    out = check_feasible(sp, {"i0": 1, "i1": 1})
    assert [v.kind for v in out] == ["capacity overflow"]
    assert "overflow 7" in out[0].detail


def test_spread_overflow():
    sp = one_pcb([1, 1], 33, 2, 1)
    out = check_feasible(sp, {"i0": 1, "i1": 2})
    assert [v.kind for v in out] == ["spread overflow"]


def test_missing_duplicate_and_range():
    sp = one_pcb([1, 1, 1], 33, 2, 2)
    out = check_feasible(sp, [("i0", 1), ("i0", 2), ("i2", 3)])
    assert {v.kind for v in out} == {"missing assignment", "duplicate assignment",
                                     "container out of range", "spread overflow"}


def test_objective_mismatch_detected():
    sp = one_pcb([1, 1], 33, 2, 2)
    sol = Solution({"i0": 1, "i1": 2}, frozenset({1, 2}), {"p": frozenset({1, 2})}, 1)
    assert [v.kind for v in check_feasible(sp, sol)] == ["objective mismatch"]


def bell(n):
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


@pytest.mark.parametrize("n", range(0, 7))
def test_canonical_enumeration_counts_set_partitions(n):
    vecs = list(canonical_assignments(n, n))
    assert len(vecs) == bell(n)
    assert len(set(vecs)) == len(vecs)


def test_canonical_enumeration_covers_every_labelling_up_to_relabel():
    n, T = 5, 3
    canon = set(canonical_assignments(n, T))
    for vec in itertools.product(range(1, T + 1), repeat=n):
        relabel = {}
        form = tuple(relabel.setdefault(t, len(relabel) + 1) for t in vec)
        assert form in canon


def test_brute_force_examples():
    assert brute_force_optimum(one_pcb([33, 33], 33, 2, 2)).objective == 2
    assert brute_force_optimum(one_pcb([10, 10, 10, 3], 33, 1, 1)).objective == 1
    res = brute_force_optimum(one_pcb([10, 10, 10, 4], 33, 2, 1))
    assert res.status is Status.INFEASIBLE and res.witness is None


def test_brute_force_witness_is_feasible():
    rng = random.Random(3)
    for _ in range(100):
        sp = random_subproblem(rng)
        res = brute_force_optimum(sp)
        if res.witness is not None:
            assert check_feasible(sp, res.witness) == []
            assert res.witness.objective == res.objective


def test_brute_force_refuses_large():
    with pytest.raises(OracleTooLarge):
        brute_force_optimum(one_pcb([1] * 11, 33, 3, 3))
    assert brute_force_optimum(one_pcb([1] * 11, 33, 1, 1), cap=None).objective == 1


def test_brute_force_invariant_under_permutation_and_relabel():
    rng = random.Random(11)
    for _ in range(60):
        sp = random_subproblem(rng, max_items=7)
        base = brute_force_optimum(sp).objective
        items = list(sp.items)
        rng.shuffle(items)
        ren = {p: f"q{k}" for k, p in enumerate(reversed(sorted(sp.pcb_groups)))}
        sp2 = Subproblem(items, sp.capacity, sp.max_containers,
                         {ren[p]: g for p, g in sp.pcb_groups.items()},
                         {ren[p]: v for p, v in sp.limits.items()})
        assert brute_force_optimum(sp2).objective == base


def test_reduction_examples():
    yes = BppInstance([4] * 9, 12, 3)
    sp = reduce_bpp_to_top(yes)
    assert sp.max_containers == 3 and sp.limits == {"bpp": 3}
    assert brute_force_optimum(sp).objective == 3
    assert bpp_decide_via_top(yes) is True
    no = BppInstance([4] * 9, 12, 2)
    assert brute_force_optimum(reduce_bpp_to_top(no)).status is Status.INFEASIBLE
    assert bpp_decide_via_top(no) is False


def test_reduction_matches_direct_bpp_decision():
    rng = random.Random(5)
    for _ in range(150):
        cap = rng.randint(3, 10)
        bpp = BppInstance([rng.randint(1, cap) for _ in range(rng.randint(1, 7))], cap,
                          rng.randint(1, 4))
        assert bpp_decide_via_top(bpp) == bpp_decide_exhaustive(bpp)


def test_bpp_instance_validation():
    with pytest.raises(ValueError):
        BppInstance([13], 12, 1)
