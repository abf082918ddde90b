"""Instance files, synthetic instance generation, plans and reports.

Instance files are JSON documents with three sections::

    {
      "line": {"container_positions": 16, "trolley_capacity": 33, ...},
      "components": [{"id": "C1", "size": 1, "class": "trolley"}, ...],
      "pcbs": [{"id": "P1", "components": ["C1", ...]}, ...]
    }
"""

from __future__ import annotations

import csv
import io
import json
import random
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .core import (ComponentSpec, ContainerClass, Instance, LineConfig, PcbSpec, Status,
                   validate_instance)
from .decomposition import ContainerLoad, LoadingPlan


class InstanceError(Exception):
    """Instance could not be read; ``violations`` is set when validation failed."""

    def __init__(self, message: str, violations=None):
        self.violations = list(violations or [])
        super().__init__(message)


def instance_to_dict(inst: Instance) -> dict:
    return {
        "line": asdict(inst.line),
        "components": [{"id": c.id, "size": c.size, "class": c.cls.value} for c in inst.components],
        "pcbs": [{"id": p.id, "components": sorted(p.required)} for p in inst.pcbs],
    }


def instance_from_dict(doc: dict) -> Instance:
    try:
        line_keys = {f.name for f in fields(LineConfig)}
        raw_line = doc.get("line", {})
        unknown = set(raw_line) - line_keys
        if unknown:
            raise InstanceError(f"unknown line config keys: {sorted(unknown)}")
        line = LineConfig(**raw_line)
        comps = [ComponentSpec(str(c["id"]), c["size"], ContainerClass(c.get("class", "trolley")))
                 for c in doc["components"]]
        pcbs = [PcbSpec(str(p["id"]), [str(c) for c in p["components"]]) for p in doc["pcbs"]]
    except InstanceError:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as err:
        raise InstanceError(f"malformed instance document: {err!r}") from err
    return Instance(comps, pcbs, line)


def dumps_instance(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), indent=1) + "\n"


def save_instance(inst: Instance, path) -> None:
    Path(path).write_text(dumps_instance(inst), encoding="utf-8")


def load_instance(path) -> Instance:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise InstanceError(f"cannot read {path}: {err.strerror}") from err
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise InstanceError(f"{path}:{err.lineno}:{err.colno}: {err.msg}") from err
    inst = instance_from_dict(doc)
    problems = validate_instance(inst)
    if problems:
        raise InstanceError(f"{path}: {len(problems)} validation error(s)", problems)
    return inst


def load_components_csv(path) -> list[ComponentSpec]:
    """Components table as CSV with header ``id,size,class``."""
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            out.append(ComponentSpec(row["id"], int(row["size"]),
                                     ContainerClass(row.get("class") or "trolley")))
    return out


# ---------------------------------------------------------------------------
# generator


class GenerationError(ValueError):
    pass


@dataclass(frozen=True)
class GeneratorSpec:
    n_pcbs: int
    n_trolley_components: int
    n_stacker_components: int
    # slot-size histograms (size -> weight)
    trolley_sizes: dict = field(default_factory=lambda: {1: 1.0})
    stacker_sizes: dict = field(default_factory=lambda: {1: 1.0})
    n_families: int = 8
    overlap: float = 0.5
    # fraction of a PCB's components drawn from outside its family
    cross_family: float = 0.1
    components_per_pcb: tuple = (20, 60)
    stacker_components_per_pcb: tuple = (0, 3)
    line: LineConfig = field(default_factory=LineConfig)
    # None: set max_trolleys from a greedy loading of the generated instance
    max_trolleys: int | None = None
    seed: int = 0

    def check(self) -> None:
        for name, hist in (("trolley_sizes", self.trolley_sizes), ("stacker_sizes", self.stacker_sizes)):
            if any(w < 0 for w in hist.values()) or not any(w > 0 for w in hist.values()):
                raise GenerationError(f"{name}: weights must be non-negative and not all zero")
        if not 0.0 <= self.overlap <= 1.0 or not 0.0 <= self.cross_family <= 1.0:
            raise GenerationError("overlap and cross_family must lie in [0, 1]")
        if self.n_pcbs < 0 or self.n_trolley_components < 0 or self.n_stacker_components < 0:
            raise GenerationError("counts must be non-negative")
        if self.n_pcbs and not (self.n_trolley_components + self.n_stacker_components):
            raise GenerationError("PCBs requested but no components")
        if (self.n_trolley_components + self.n_stacker_components) and not self.n_pcbs:
            raise GenerationError("components requested but no PCBs to reference them")
        if self.n_families < 1:
            raise GenerationError("n_families must be >= 1")
        lo, hi = self.components_per_pcb
        if lo < 1 or hi < lo:
            raise GenerationError("components_per_pcb must be a range with 1 <= lo <= hi")

    @classmethod
    def from_dict(cls, doc: dict) -> "GeneratorSpec":
        doc = dict(doc)
        for key in ("trolley_sizes", "stacker_sizes"):
            if key in doc:
                doc[key] = {int(k): float(v) for k, v in doc[key].items()}
        for key in ("components_per_pcb", "stacker_components_per_pcb"):
            if key in doc:
                doc[key] = tuple(doc[key])
        if "line" in doc:
            doc["line"] = LineConfig(**doc["line"])
        return cls(**doc)


# Published per-class counts; size mass concentrated at one slot.  Stacker sizes are in
# stacker slots and must fit the two 30-slot stackers the presets allow.
_TROLLEY_HIST = {1: 0.70, 2: 0.14, 3: 0.08, 4: 0.05, 5: 0.03}
PRESETS = {
    "dataset-a": GeneratorSpec(
        n_pcbs=80, n_trolley_components=537, n_stacker_components=42,
        trolley_sizes=_TROLLEY_HIST, stacker_sizes={1: 0.85, 2: 0.15},
        n_families=10, overlap=0.5, cross_family=0.05, components_per_pcb=(20, 70),
        line=LineConfig(container_positions=16, trolley_capacity=33, stacker_capacity=30,
                        max_trolleys=28, max_stackers=2)),
    "dataset-b": GeneratorSpec(
        n_pcbs=62, n_trolley_components=930, n_stacker_components=55,
        trolley_sizes=_TROLLEY_HIST, stacker_sizes={1: 0.95, 2: 0.05},
        n_families=8, overlap=0.5, cross_family=0.05, components_per_pcb=(40, 120),
        line=LineConfig(container_positions=24, trolley_capacity=33, stacker_capacity=30,
                        max_trolleys=50, max_stackers=2)),
}


def preset(name: str, **overrides) -> GeneratorSpec:
    try:
        spec = PRESETS[name]
    except KeyError:
        raise GenerationError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return replace(spec, **overrides)


def _draw_sizes(rng: random.Random, hist: dict, n: int) -> list[int]:
    keys = sorted(hist)
    return rng.choices(keys, weights=[hist[k] for k in keys], k=n)


def generate(spec: GeneratorSpec) -> Instance:
    """Deterministic synthetic instance with the requested per-class counts.

    Components are split into family pools; each PCB takes its family's core
    set (``overlap`` of its size), fills up from its pool, and draws a
    ``cross_family`` share from other pools.  Components no PCB picked are
    attached to a PCB of their family.
    """
    spec.check()
    rng = random.Random(spec.seed)
    line = spec.line
    width = len(str(max(spec.n_trolley_components + spec.n_stacker_components, 1)))

    t_sizes = _draw_sizes(rng, spec.trolley_sizes, spec.n_trolley_components)
    budget = line.max_stackers * line.stacker_capacity
    for _ in range(1000):
        s_sizes = _draw_sizes(rng, spec.stacker_sizes, spec.n_stacker_components)
        if sum(s_sizes) <= budget or not spec.n_stacker_components:
            break
    else:
        raise GenerationError("stacker components cannot fit within max_stackers")
    if any(s > line.trolley_capacity for s in t_sizes) or any(s > line.stacker_capacity for s in s_sizes):
        raise GenerationError("size histogram exceeds container capacity")

    comps = [ComponentSpec(f"C{n + 1:0{width}d}", s, ContainerClass.TROLLEY)
             for n, s in enumerate(t_sizes)]
    comps += [ComponentSpec(f"C{len(t_sizes) + n + 1:0{width}d}", s, ContainerClass.STACKER)
              for n, s in enumerate(s_sizes)]
    if not spec.n_pcbs:
        return Instance(comps, [], line)

    F = min(spec.n_families, spec.n_pcbs)
    trolley_ids = [c.id for c in comps if c.cls is ContainerClass.TROLLEY]
    stacker_ids = [c.id for c in comps if c.cls is ContainerClass.STACKER]
    rng.shuffle(trolley_ids)
    pools = [trolley_ids[f::F] for f in range(F)]
    family_of = {cid: f for f in range(F) for cid in pools[f]}

    cores = []
    lo, hi = spec.components_per_pcb
    for f in range(F):
        k = round(spec.overlap * (lo + hi) / 2)
        cores.append(set(rng.sample(pools[f], min(k, len(pools[f])))))

    members: list[set[str]] = []
    fam_of_pcb = []
    for p in range(spec.n_pcbs):
        f = p % F
        fam_of_pcb.append(f)
        k = rng.randint(lo, hi)
        chosen = set(cores[f])
        n_cross = round(spec.cross_family * k) if F > 1 else 0
        own = [c for c in pools[f] if c not in chosen]
        want = max(0, k - len(chosen) - n_cross)
        chosen |= set(rng.sample(own, min(want, len(own))))
        others = [c for g in range(F) if g != f for c in pools[g]]
        chosen |= set(rng.sample(others, min(n_cross, len(others))))
        slo, shi = spec.stacker_components_per_pcb
        ks = min(rng.randint(slo, shi), len(stacker_ids))
        chosen |= set(rng.sample(stacker_ids, ks))
        members.append(chosen)

    referenced = set().union(*members)
    by_family = {f: [p for p in range(spec.n_pcbs) if fam_of_pcb[p] == f] for f in range(F)}
    for c in comps:
        if c.id in referenced:
            continue
        f = family_of.get(c.id)
        candidates = by_family[f] if f is not None else list(range(spec.n_pcbs))
        members[rng.choice(candidates)].add(c.id)

    pwidth = len(str(spec.n_pcbs))
    pcbs = [PcbSpec(f"P{p + 1:0{pwidth}d}", sorted(m)) for p, m in enumerate(members)]
    inst = Instance(comps, pcbs, line)
    if spec.max_trolleys is not None:
        return Instance(comps, pcbs, replace(line, max_trolleys=spec.max_trolleys))
    return Instance(comps, pcbs, replace(line, max_trolleys=greedy_trolley_budget(inst)))


def greedy_trolley_budget(inst: Instance) -> int:
    """Trolley count of a greedy loading, used as the default budget T."""
    from .decomposition import (build_stacker_subproblem, build_trolley_subproblem,
                                derive_trolley_limits)
    from .heuristics import best_greedy

    n_trolley = sum(1 for c in inst.components if c.cls is ContainerClass.TROLLEY)
    st_sub = build_stacker_subproblem(inst)
    st = best_greedy(st_sub)
    if st is None:
        raise GenerationError("no greedy stacker loading within max_stackers")
    wide = replace(inst.line, max_trolleys=max(n_trolley, 1))
    wide_inst = Instance(inst.components, inst.pcbs, wide)
    limits = derive_trolley_limits(wide_inst, st)
    sol = best_greedy(build_trolley_subproblem(wide_inst, limits))
    if sol is None:
        raise GenerationError("no greedy trolley loading respects the PCB limits")
    return max(sol.objective, 1)


# ---------------------------------------------------------------------------
# plans and reports


def plan_to_dict(plan: LoadingPlan, status: Status | str | None = None, extra: dict | None = None) -> dict:
    doc = {
        "summary": {"trolleys": plan.trolleys, "stackers": plan.stackers,
                    "objective": plan.trolleys + plan.stackers,
                    "status": Status(status).value if status is not None else None},
        "containers": [{"kind": c.kind.value, "index": c.index, "used_slots": c.used_slots,
                        "capacity": c.capacity, "components": list(c.components)}
                       for c in plan.containers],
        "pulls": {p: {"trolleys": list(t), "stackers": list(s)} for p, (t, s) in plan.pulls.items()},
    }
    if extra:
        doc.update(extra)
    return doc


def dumps_plan(plan: LoadingPlan, status=None, extra: dict | None = None) -> str:
    return json.dumps(plan_to_dict(plan, status, extra), indent=1) + "\n"


def plan_from_dict(doc: dict) -> tuple[LoadingPlan, str | None]:
    containers = tuple(ContainerLoad(ContainerClass(c["kind"]), int(c["index"]),
                                     tuple(c["components"]), int(c["used_slots"]), int(c["capacity"]))
                       for c in doc["containers"])
    pulls = {p: (tuple(v["trolleys"]), tuple(v["stackers"])) for p, v in doc["pulls"].items()}
    summary = doc["summary"]
    return LoadingPlan(containers, pulls, int(summary["trolleys"]), int(summary["stackers"])), summary.get("status")


def load_plan(path) -> tuple[LoadingPlan, str | None]:
    return plan_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


UTILISATION_COLUMNS = ("container", "kind", "used_slots", "capacity", "fill_pct")


def utilisation_rows(plan: LoadingPlan) -> list[tuple]:
    return [(c.index, c.kind.value, c.used_slots, c.capacity, f"{c.fill:.1f}") for c in plan.containers]


def pull_rows(plan: LoadingPlan) -> list[tuple]:
    return [(p, ";".join(map(str, t)), ";".join(map(str, s))) for p, (t, s) in plan.pulls.items()]


def summary_row(plan: LoadingPlan, status=None) -> tuple:
    st = Status(status).value if status is not None else ""
    return (plan.trolleys, plan.stackers, plan.trolleys + plan.stackers, st)


def report(plan: LoadingPlan, fmt: str = "text", status=None) -> str:
    """Utilisation table, per-PCB pull list and summary as text or CSV."""
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(UTILISATION_COLUMNS)
        w.writerows(utilisation_rows(plan))
        w.writerow([])
        w.writerow(("pcb", "trolleys", "stackers"))
        w.writerows(pull_rows(plan))
        w.writerow([])
        w.writerow(("trolleys", "stackers", "objective", "status"))
        w.writerow(summary_row(plan, status))
        return buf.getvalue()
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")
    out = [f"{'container':>9}  {'kind':<7}  {'used':>4}  {'cap':>3}  {'fill%':>6}"]
    for idx, kind, used, cap, fill in utilisation_rows(plan):
        out.append(f"{idx:>9}  {kind:<7}  {used:>4}  {cap:>3}  {fill:>6}")
    out.append("")
    out.append("pcb pull list (trolleys | stackers)")
    for p, t, s in pull_rows(plan):
        out.append(f"  {p}: {t or '-'} | {s or '-'}")
    out.append("")
    tro, sta, obj, st = summary_row(plan, status)
    out.append(f"trolleys={tro} stackers={sta} objective={obj} status={st or 'unknown'}")
    return "\n".join(out) + "\n"
