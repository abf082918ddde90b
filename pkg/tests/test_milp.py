import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from trolleyopt.core import Subproblem, count_variables
from trolleyopt.exact import solve
from trolleyopt.milp import (LpParseError, build_model, check_solution_against_model,
                             count_constraints, emit_lp_text, objective_value, parse_lp_text,
                             solution_values)
from trolleyopt.oracle import check_feasible

from .strategies import random_subproblem


def toy():
    return Subproblem([("a", 3), ("b", 4)], 10, 2, {"p": ["a", "b"]}, {"p": 2})


def test_toy_counts():
    m = build_model(toy())
    assert m.n_constraints == 9
    assert m.n_variables == 8
    names = [c.name for c in m.constraints]
    assert names == ["assign_1", "assign_2", "cap_1", "cap_2", "limit_1",
                     "link_up_1_1", "link_up_1_2", "link_dn_1_1", "link_dn_1_2"]


def test_dataset_a_shape_variable_count():
    items = [(f"c{k}", 1) for k in range(537)]
    groups = {f"p{j}": [f"c{(j * 7 + k) % 537}" for k in range(10)] for j in range(80)}
    groups["p0"] = [i for i, _ in items]
    sp = Subproblem(items, 33, 28, groups, {p: 14 for p in groups})
    m = build_model(sp)
    assert m.n_variables == 17_304
    assert m.n_constraints == count_constraints(537, 28, 80) == 537 + 28 + 80 + 2 * 28 * 80


@given(st.integers(0, 6), st.integers(1, 4), st.integers(0, 4), st.booleans())
@settings(max_examples=60, deadline=None)
def test_count_formulas(C, T, P, link_down):
    items = [(f"i{k}", 1) for k in range(C)]
    groups = {f"p{j}": [i for i, _ in items] for j in range(P)}
    m = build_model(Subproblem(items, 5, T, groups, {p: T for p in groups}), link_down=link_down)
    assert m.n_variables == count_variables(C, T, P)
    assert m.n_constraints == count_constraints(C, T, P, link_down)
    for row in m.constraints:
        assert all(isinstance(c, int) for _, c in row.terms)


def test_big_m_choices():
    sp = Subproblem([("a", 1), ("b", 1), ("c", 1)], 5, 2, {"p": ["a"], "q": ["a", "b", "c"]},
                    {"p": 1, "q": 2})
    assert build_model(sp).big_m == {1: 1, 2: 3}
    assert build_model(sp, big_m="global").big_m == {1: 3, 2: 3}
    assert build_model(sp, big_m=1000).big_m == {1: 1000, 2: 1000}


def test_empty_model_text():
    text = emit_lp_text(build_model(Subproblem([], 33, 1, {}, {})))
    assert text == ("\\ trolley assignment model\nMinimize\n obj: y_1\nSubject To\n"
                    " cap_1: - 33 y_1 <= 0\nBinary\n y_1\nEnd\n")


def test_toy_round_trip_and_determinism():
    m = build_model(toy())
    text = emit_lp_text(m)
    assert text == emit_lp_text(build_model(toy()))
    body = text.split("Subject To\n")[1].split("Binary\n")[0]
    assert len(body.strip().splitlines()) == 9
    again = parse_lp_text(text)
    assert again == m
    assert again.n_constraints == 9 and again.n_variables == 8


def test_round_trip_random():
    rng = random.Random(17)
    for _ in range(50):
        sp = random_subproblem(rng)
        for kw in ({}, {"big_m": "global"}, {"link_down": False}):
            m = build_model(sp, **kw)
            assert parse_lp_text(emit_lp_text(m)) == m


def test_round_trip_empty_group():
    sp = Subproblem([("a", 1)], 30, 2, {"p": ["a"], "none": []}, {"p": 2, "none": 2})
    m = build_model(sp)
    assert parse_lp_text(emit_lp_text(m)) == m


@pytest.mark.parametrize("text,line", [
    ("garbage\n", 1),
    ("Minimize\n obj: y_1\nSubject To\n cap_1: y_1 <=\n", 4),
    ("Minimize\n obj: y_1\nBinary\n y_1\nEnd\n", 3),
    ("Minimize\n obj: y_1\nSubject To\nBinary\n y_1\n", 6),
])
def test_parse_errors_carry_line(text, line):
    with pytest.raises(LpParseError) as err:
        parse_lp_text(text)
    assert err.value.line == line


def test_parse_rejects_undeclared_variable():
    text = emit_lp_text(build_model(toy())).replace(" x_1_1 + x_1_2 = 1", " x_1_1 + w_9 = 1")
    with pytest.raises(LpParseError, match="w_9"):
        parse_lp_text(text)


def test_solver_solution_satisfies_model():
    sp = toy()
    sol = solve(sp).best
    m = build_model(sp)
    vals = solution_values(sp, sol)
    assert check_solution_against_model(m, vals) == []
    assert objective_value(m, vals) == sol.objective


def test_dropping_y_reports_capacity_row():
    sp = toy()
    m = build_model(sp)
    vals = solution_values(sp, {"a": 1, "b": 1})
    vals["y_1"] = 0
    out = check_solution_against_model(m, vals)
    assert [v.constraint for v in out] == ["cap_1"]
    assert out[0].slack == 7


def test_dropping_z_reports_link_up():
    sp = toy()
    m = build_model(sp)
    vals = solution_values(sp, {"a": 1, "b": 2})
    vals["z_1_2"] = 0
    out = check_solution_against_model(m, vals)
    assert [v.constraint for v in out] == ["link_up_1_2"]
    assert out[0].slack > 0


def test_missing_value_is_an_input_error():
    m = build_model(toy())
    vals = solution_values(toy(), {"a": 1, "b": 1})
    del vals["x_2_2"]
    with pytest.raises(ValueError, match="x_2_2"):
        check_solution_against_model(m, vals)


def all_points(sp):
    """Every assignment with y and z set to the values the assignment implies."""
    ids = [i for i, _ in sp.items]
    for vec in itertools.product(range(1, sp.max_containers + 1), repeat=len(ids)):
        yield dict(zip(ids, vec))


def test_model_agrees_with_checker_on_every_assignment():
    rng = random.Random(3)
    for _ in range(40):
        sp = random_subproblem(rng, max_items=5, max_containers=3)
        m = build_model(sp)
        for assignment in all_points(sp):
            feasible = not check_feasible(sp, assignment)
            ok = not check_solution_against_model(m, solution_values(sp, assignment))
            assert feasible == ok


def test_model_rejects_points_with_wrong_indicators():
    """Any 0/1 point of the model maps back to a loading with the same y count."""
    sp = Subproblem([("a", 3), ("b", 4)], 5, 2, {"p": ["a", "b"]}, {"p": 2})
    m = build_model(sp)
    good = 0
    for bits in itertools.product((0, 1), repeat=m.n_variables):
        vals = dict(zip(m.variables, bits))
        if check_solution_against_model(m, vals):
            continue
        good += 1
        assignment = {item: t for item, i in (("a", 1), ("b", 2)) for t in (1, 2) if vals[f"x_{i}_{t}"]}
        assert check_feasible(sp, assignment) == []
        assert sum(vals[f"y_{t}"] for t in (1, 2)) >= len(set(assignment.values()))
    assert good > 0
