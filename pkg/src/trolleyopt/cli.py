"""Command-line front end: ``trolleyopt {validate,generate,solve,export-lp,sweep,report}``.

Exit codes: 0 ok, 2 validation failure, 3 infeasible, 4 limit reached,
5 I/O or parse error.  Failures print one ``error <code>: <detail>`` line
on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .core import Status
from .dataio import (GenerationError, GeneratorSpec, InstanceError, dumps_instance, dumps_plan,
                     generate, load_instance, load_plan, preset, report)
from .decomposition import (InfeasibleLimits, LimitRule, build_stacker_subproblem,
                            build_trolley_subproblem, derive_trolley_limits)
from .exact import SolverConfig, sensitivity_sweep, solve, solve_instance
from .milp import LpParseError, build_model, emit_lp_text, parse_lp_text

EXIT_OK, EXIT_INVALID, EXIT_INFEASIBLE, EXIT_LIMIT, EXIT_IO = 0, 2, 3, 4, 5
_CODES = {EXIT_INVALID: "invalid", EXIT_INFEASIBLE: "infeasible", EXIT_LIMIT: "limit", EXIT_IO: "io"}


class CliError(Exception):
    def __init__(self, exit_code: int, detail: str):
        self.exit_code = exit_code
        super().__init__(detail)


def _write(path, text: str) -> None:
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as err:
        raise CliError(EXIT_IO, f"cannot write {path}: {err.strerror}") from err


def _load(path):
    try:
        return load_instance(path)
    except InstanceError as err:
        if err.violations:
            for v in err.violations:
                print(f"  {v}", file=sys.stderr)
            raise CliError(EXIT_INVALID, str(err)) from err
        raise CliError(EXIT_IO, str(err)) from err


def _config(args) -> SolverConfig:
    return SolverConfig(time_limit=args.time_limit, node_limit=args.node_limit,
                        use_incumbent=not args.no_incumbent,
                        symmetry_breaking=not args.no_symmetry, log_every=args.log_every)


def _exit_for(status: Status) -> int:
    return {Status.INFEASIBLE: EXIT_INFEASIBLE, Status.LIMIT_REACHED: EXIT_LIMIT}.get(status, EXIT_OK)


def cmd_validate(args) -> int:
    if args.lp:
        try:
            text = Path(args.path).read_text(encoding="utf-8")
        except OSError as err:
            raise CliError(EXIT_IO, f"cannot read {args.path}: {err.strerror}") from err
        try:
            model = parse_lp_text(text)
        except LpParseError as err:
            raise CliError(EXIT_IO, f"{args.path}: {err}") from err
        print(f"ok: {model.n_variables} variables, {model.n_constraints} constraints")
        return EXIT_OK
    inst = _load(args.path)
    print(f"ok: {len(inst.components)} components, {len(inst.pcbs)} pcbs")
    return EXIT_OK


def cmd_generate(args) -> int:
    try:
        if args.spec:
            doc = json.loads(Path(args.spec).read_text(encoding="utf-8"))
            if args.seed is not None:
                doc["seed"] = args.seed
            spec = GeneratorSpec.from_dict(doc)
        else:
            spec = preset(args.preset, **({"seed": args.seed} if args.seed is not None else {}))
        inst = generate(spec)
    except (OSError, json.JSONDecodeError, TypeError) as err:
        raise CliError(EXIT_IO, f"cannot read generator spec: {err}") from err
    except GenerationError as err:
        raise CliError(EXIT_INVALID, str(err)) from err
    _write(args.output, dumps_instance(inst))
    return EXIT_OK


def _progress(args):
    if args.quiet:
        return None

    def emit(stage, ev):
        inc = "-" if ev.incumbent is None else ev.incumbent
        bnd = "-" if ev.bound is None else ev.bound
        print(f"[{stage}] nodes={ev.nodes} incumbent={inc} bound={bnd} elapsed={ev.elapsed:.2f}s",
              file=sys.stderr)
    return emit


def cmd_solve(args) -> int:
    inst = _load(args.instance)
    res = solve_instance(inst, _config(args), LimitRule(args.rule), on_progress=_progress(args))
    if res.plan is None:
        who = f" pcb={res.blocking_pcb}" if res.blocking_pcb else ""
        raise CliError(_exit_for(res.status) or EXIT_INFEASIBLE,
                       f"stage={res.stage}{who} {res.message}")
    extra = {"nodes": {"stacker": res.stacker.nodes, "trolley": res.trolley.nodes},
             "stages": {"stacker": res.stacker.status.value, "trolley": res.trolley.status.value},
             "trolley_limits": dict(sorted(res.limits.items()))}
    _write(args.output, dumps_plan(res.plan, res.status, extra))
    if args.report:
        _write(args.report, report(res.plan, "csv" if str(args.report).endswith(".csv") else "text",
                                   res.status))
    return _exit_for(res.status)


def cmd_export_lp(args) -> int:
    inst = _load(args.instance)
    stacker_sub = build_stacker_subproblem(inst)
    if args.stage == "stacker":
        sub = stacker_sub
    else:
        st = solve(stacker_sub, _config(args))
        if st.best is None:
            raise CliError(_exit_for(st.status), f"stage=stacker {st.reason}")
        try:
            sub = build_trolley_subproblem(inst, derive_trolley_limits(inst, st.best, LimitRule(args.rule)))
        except InfeasibleLimits as err:
            raise CliError(EXIT_INFEASIBLE, f"stage=trolley pcb={err.pcb} {err}") from err
    big_m = args.big_m if args.big_m in ("tight", "global") else int(args.big_m)
    model = build_model(sub, big_m=big_m, link_down=not args.no_link_down)
    _write(args.output, emit_lp_text(model))
    return EXIT_OK


def cmd_sweep(args) -> int:
    inst = _load(args.instance)
    try:
        limits = [int(v) for v in args.limits.split(",") if v.strip()]
    except ValueError as err:
        raise CliError(EXIT_INVALID, f"bad --limits: {args.limits!r}") from err
    try:
        rows = sensitivity_sweep(inst, limits, _config(args), LimitRule(args.rule))
    except ValueError as err:
        raise CliError(EXIT_INVALID, str(err)) from err
    lines = [("limit", "status", "trolleys", "stackers", "nodes", "elapsed_s")]
    for r in rows:
        lines.append((r.limit, r.status.value, "" if r.objective is None else r.objective,
                      "" if r.stackers is None else r.stackers, r.nodes, f"{r.elapsed:.3f}"))
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(lines)
    _write(args.output, buf.getvalue())
    return EXIT_OK


def cmd_report(args) -> int:
    try:
        plan, status = load_plan(args.plan)
    except (OSError, KeyError, ValueError) as err:
        raise CliError(EXIT_IO, f"cannot read plan {args.plan}: {err}") from err
    _write(args.output, report(plan, args.format, status))
    return EXIT_OK


def _solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--time-limit", type=float, default=None, help="seconds per stage")
    p.add_argument("--node-limit", type=int, default=None)
    p.add_argument("--no-symmetry", action="store_true", help="disable symmetry breaking")
    p.add_argument("--no-incumbent", action="store_true", help="do not seed with greedy loadings")
    p.add_argument("--log-every", type=int, default=100_000)
    p.add_argument("--rule", choices=[r.value for r in LimitRule], default=LimitRule.PER_PCB_STACKER_COUNT.value,
                   help="how stackers reduce a PCB's trolley limit")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trolleyopt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check an instance file (or an LP file with --lp)")
    p.add_argument("path")
    p.add_argument("--lp", action="store_true", help="parse PATH as an exported LP model")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("generate", help="write a synthetic instance")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=["dataset-a", "dataset-b"])
    src.add_argument("--spec", help="JSON generator spec")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="solve an instance and write the loading plan")
    p.add_argument("instance")
    p.add_argument("-o", "--output", default="-", help="plan JSON")
    p.add_argument("--report", default=None, help="also write a report (.csv or text)")
    p.add_argument("-q", "--quiet", action="store_true", help="no progress events")
    _solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("export-lp", help="write the assignment model in LP format")
    p.add_argument("instance")
    p.add_argument("--stage", choices=["trolley", "stacker"], default="trolley")
    p.add_argument("--big-m", default="tight", help="tight, global, or an integer")
    p.add_argument("--no-link-down", action="store_true", help="omit the z <= sum x rows")
    p.add_argument("-o", "--output", default="-")
    _solver_flags(p)
    p.set_defaults(func=cmd_export_lp)

    p = sub.add_parser("sweep", help="re-solve with uniform trolley limits")
    p.add_argument("instance")
    p.add_argument("--limits", required=True, help="comma-separated, e.g. 16,18,20,22")
    p.add_argument("-o", "--output", default="-")
    _solver_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="render a saved plan")
    p.add_argument("plan")
    p.add_argument("--format", choices=["text", "csv"], default="text")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as err:
        print(f"error {_CODES.get(err.exit_code, 'error')}: {err}", file=sys.stderr)
        return err.exit_code


if __name__ == "__main__":
    sys.exit(main())
