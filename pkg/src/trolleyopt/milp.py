"""Explicit 0/1 assignment model and a small LP-format writer/reader.

Variables are named by position: ``x_i_t`` (i-th item on container t),
``y_t`` (container t used) and ``z_j_t`` (j-th PCB, in sorted id order,
touches container t).  Indices start at 1.

Only a subset of the CPLEX LP format is produced and accepted::

    \\ comment lines (``\\ big_m <pcb index> <value>`` is read back)
    Minimize
     obj: y_1 + y_2
    Subject To
     assign_1: x_1_1 + x_1_2 = 1
     cap_1: 3 x_1_1 - 33 y_1 <= 0
    Binary
     x_1_1
    End
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping

from .core import Solution, Subproblem, count_variables

LE, EQ = "<=", "="


@dataclass(frozen=True)
class Constraint:
    name: str
    terms: tuple  # ((variable, coefficient), ...)
    sense: str
    rhs: int

    def lhs(self, values: Mapping[str, int]) -> int:
        return sum(c * values[v] for v, c in self.terms)


@dataclass(frozen=True)
class MilpModel:
    variables: tuple
    objective: tuple  # ((variable, coefficient), ...), minimised
    constraints: tuple
    big_m: Mapping[int, int] = field(default_factory=dict)

    @property
    def n_variables(self) -> int:
        return len(self.variables)

    @property
    def n_constraints(self) -> int:
        return len(self.constraints)


def count_constraints(n_items: int, n_containers: int, n_pcbs: int, link_down: bool = True) -> int:
    return n_items + n_containers + n_pcbs + (2 if link_down else 1) * n_containers * n_pcbs


def x_name(i: int, t: int) -> str:
    return f"x_{i}_{t}"


def y_name(t: int) -> str:
    return f"y_{t}"


def z_name(j: int, t: int) -> str:
    return f"z_{j}_{t}"


def build_model(subp: Subproblem, big_m: str | int = "tight", link_down: bool = True) -> MilpModel:
    """Assignment model: one container per item, capacity, PCB span limit, and
    the big-M pair tying ``z`` to the items placed.

    ``big_m="tight"`` uses the PCB's item count; ``"global"`` uses the item
    count of the whole subproblem; an integer is used verbatim.
    """
    C = len(subp.items)
    T = subp.max_containers
    pcbs = sorted(subp.pcb_groups)
    index = {item: n for n, (item, _) in enumerate(subp.items, start=1)}
    rng = range(1, T + 1)

    variables = ([x_name(i, t) for i in range(1, C + 1) for t in rng]
                 + [y_name(t) for t in rng]
                 + [z_name(j, t) for j in range(1, len(pcbs) + 1) for t in rng])
    objective = tuple((y_name(t), 1) for t in rng)

    rows = []
    for i in range(1, C + 1):
        rows.append(Constraint(f"assign_{i}", tuple((x_name(i, t), 1) for t in rng), EQ, 1))
    for t in rng:
        terms = [(x_name(i, t), s) for i, (_, s) in enumerate(subp.items, start=1)]
        terms.append((y_name(t), -subp.capacity))
        rows.append(Constraint(f"cap_{t}", tuple(terms), LE, 0))
    members = {j: sorted(index[c] for c in subp.pcb_groups[p] if c in index)
               for j, p in enumerate(pcbs, start=1)}
    ms = {}
    for j, p in enumerate(pcbs, start=1):
        if big_m == "tight":
            ms[j] = len(members[j])
        elif big_m == "global":
            ms[j] = C
        else:
            ms[j] = int(big_m)
        rows.append(Constraint(f"limit_{j}", tuple((z_name(j, t), 1) for t in rng),
                               LE, subp.limits[p]))
    for j in range(1, len(pcbs) + 1):
        for t in rng:
            terms = tuple((x_name(i, t), 1) for i in members[j]) + ((z_name(j, t), -ms[j]),)
            rows.append(Constraint(f"link_up_{j}_{t}", terms, LE, 0))
    if link_down:
        for j in range(1, len(pcbs) + 1):
            for t in rng:
                terms = ((z_name(j, t), 1),) + tuple((x_name(i, t), -1) for i in members[j])
                rows.append(Constraint(f"link_dn_{j}_{t}", terms, LE, 0))

    model = MilpModel(tuple(variables), objective, tuple(rows), ms)
    assert model.n_variables == count_variables(C, T, len(pcbs))
    return model


def solution_values(subp: Subproblem, sol: Solution | Mapping[str, int]) -> dict[str, int]:
    """0/1 point of :func:`build_model`'s variables induced by an assignment."""
    assignment = sol.assignment if isinstance(sol, Solution) else sol
    T = subp.max_containers
    pcbs = sorted(subp.pcb_groups)
    values = {}
    used = set(assignment.values())
    for i, (item, _) in enumerate(subp.items, start=1):
        for t in range(1, T + 1):
            values[x_name(i, t)] = int(assignment.get(item) == t)
    for t in range(1, T + 1):
        values[y_name(t)] = int(t in used)
    for j, p in enumerate(pcbs, start=1):
        touched = {assignment[c] for c in subp.pcb_groups[p] if c in assignment}
        for t in range(1, T + 1):
            values[z_name(j, t)] = int(t in touched)
    return values


@dataclass(frozen=True)
class ModelViolation:
    constraint: str
    slack: int

    def __str__(self) -> str:
        return f"{self.constraint}: violated by {self.slack}"


def check_solution_against_model(model: MilpModel, values: Mapping[str, int]) -> list[ModelViolation]:
    missing = [v for v in model.variables if v not in values]
    if missing:
        raise ValueError(f"no value for variable(s): {', '.join(missing[:5])}"
                         + (" ..." if len(missing) > 5 else ""))
    bad = [v for v in model.variables if values[v] not in (0, 1)]
    if bad:
        raise ValueError(f"non-binary value for variable(s): {', '.join(bad[:5])}")
    out = []
    for row in model.constraints:
        lhs = row.lhs(values)
        if row.sense == LE and lhs > row.rhs:
            out.append(ModelViolation(row.name, lhs - row.rhs))
        elif row.sense == EQ and lhs != row.rhs:
            out.append(ModelViolation(row.name, abs(lhs - row.rhs)))
    return out


def objective_value(model: MilpModel, values: Mapping[str, int]) -> int:
    return sum(c * values[v] for v, c in model.objective)


def _expr(terms) -> str:
    parts = []
    for n, (var, coef) in enumerate(terms):
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        body = var if mag == 1 else f"{mag} {var}"
        if n == 0:
            parts.append(body if sign == "+" else f"- {body}")
        else:
            parts.append(f"{sign} {body}")
    return " ".join(parts) if parts else "0"


def emit_lp_text(model: MilpModel) -> str:
    lines = ["\\ trolley assignment model"]
    for j in sorted(model.big_m):
        lines.append(f"\\ big_m {j} {model.big_m[j]}")
    lines += ["Minimize", f" obj: {_expr(model.objective)}", "Subject To"]
    for row in model.constraints:
        lines.append(f" {row.name}: {_expr(row.terms)} {row.sense} {row.rhs}")
    lines.append("Binary")
    lines += [f" {v}" for v in model.variables]
    lines.append("End")
    return "\n".join(lines) + "\n"


class LpParseError(ValueError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


_NAME = r"[A-Za-z_][A-Za-z0-9_]*"
_ROW = re.compile(rf"^\s*({_NAME})\s*:\s*(.*?)\s*(<=|=)\s*(-?\d+)\s*$")
_OBJ = re.compile(rf"^\s*({_NAME})\s*:\s*(.*?)\s*$")
_TERM = re.compile(rf"([+-])?\s*(\d+)?\s*({_NAME})")
_BIG_M = re.compile(r"^\\\s*big_m\s+(\d+)\s+(-?\d+)\s*$")


def _parse_expr(text: str, lineno: int) -> tuple:
    text = text.strip()
    if text == "0":
        return ()
    terms = []
    pos = 0
    first = True
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m or (m.group(1) is None and not first):
            raise LpParseError(lineno, f"cannot parse expression near {text[pos:]!r}")
        sign = -1 if m.group(1) == "-" else 1
        coef = int(m.group(2)) if m.group(2) is not None else 1
        terms.append((m.group(3), sign * coef))
        pos = m.end()
        while pos < len(text) and text[pos] == " ":
            pos += 1
        first = False
    return tuple(terms)


def parse_lp_text(text: str) -> MilpModel:
    section = None
    objective = None
    rows: list[Constraint] = []
    variables: list[str] = []
    big_m: dict[int, int] = {}
    ended = False
    refs: list[tuple[int, str]] = []
    headers = {"minimize": "obj", "subject to": "rows", "binary": "bin", "end": "end"}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("\\"):
            m = _BIG_M.match(line)
            if m:
                big_m[int(m.group(1))] = int(m.group(2))
            continue
        if ended:
            raise LpParseError(lineno, "content after End")
        key = line.lower()
        if key in headers:
            nxt = headers[key]
            expected = {None: "obj", "obj": "rows", "rows": "bin", "bin": "end"}[section]
            if nxt != expected:
                raise LpParseError(lineno, f"unexpected section header {line!r}")
            section = nxt
            ended = nxt == "end"
            continue
        if section is None:
            raise LpParseError(lineno, f"expected 'Minimize', got {line!r}")
        if section == "obj":
            m = _OBJ.match(line)
            if not m or objective is not None:
                raise LpParseError(lineno, f"malformed objective {line!r}")
            objective = _parse_expr(m.group(2), lineno)
            refs += [(lineno, v) for v, _ in objective]
        elif section == "rows":
            m = _ROW.match(line)
            if not m:
                raise LpParseError(lineno, f"malformed constraint row {line!r}")
            terms = _parse_expr(m.group(2), lineno)
            rows.append(Constraint(m.group(1), terms, m.group(3), int(m.group(4))))
            refs += [(lineno, v) for v, _ in terms]
        elif section == "bin":
            if not re.fullmatch(_NAME, line):
                raise LpParseError(lineno, f"malformed binary declaration {line!r}")
            variables.append(line)

    if not ended:
        raise LpParseError(len(text.splitlines()) + 1, "missing End")
    declared = set(variables)
    for lineno, v in refs:
        if v not in declared:
            raise LpParseError(lineno, f"undeclared variable {v}")
    return MilpModel(tuple(variables), objective or (), tuple(rows), big_m)
