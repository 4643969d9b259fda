"""Command-line surface wiring the library operations to canonical documents.

Machine output (the default) is canonical JSON on standard output;
`--format human` prints small tables instead.  Diagnostics always go to
standard error.  Exit codes: 0 ok, 2 parse/validate, 3 size guard,
4 infeasible, 5 internal.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

from . import core, csp as csp_mod, distlp, generate, labellp, rounding, uml
from .errors import (
    AssumptionViolationError,
    DemandcutError,
    DimensionMismatchError,
    DirectedInputError,
    InfeasibleInputError,
    InfeasibleStructureError,
    InfiniteEdgeCutError,
    InvalidCutError,
    MalformedFamilyError,
    MarginalMismatchError,
    NoFeasibleCutError,
    NoFiniteAssignmentError,
    NotBipartiteError,
    NotTK2FreeError,
    NumericFailureError,
    ParameterError,
    ParseError,
    SizeGuardError,
    ValidationError,
)
from .lp import OPTIMAL, solve_lp
from . import serialize as ser

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_SIZE = 3
EXIT_INFEASIBLE = 4
EXIT_INTERNAL = 5

_PARSE_ERRORS = (ParseError, ValidationError, ParameterError, MalformedFamilyError)
_INFEASIBLE_ERRORS = (
    InfeasibleStructureError,
    NoFeasibleCutError,
    NoFiniteAssignmentError,
    InfeasibleInputError,
    NotTK2FreeError,
    NotBipartiteError,
    AssumptionViolationError,
    InvalidCutError,
    InfiniteEdgeCutError,
    MarginalMismatchError,
    DirectedInputError,
    DimensionMismatchError,
)


@dataclass
class RunConfig:
    """Seeds, caps and tolerances shared by the commands.

    Environment variables DEMANDCUT_ENUM_CAP, DEMANDCUT_LABEL_CAP,
    DEMANDCUT_OPT_CAP, DEMANDCUT_CSP_CAP and DEMANDCUT_MIS_CAP override the
    defaults.
    """

    seed: int = 0
    trials: int = 32
    enum_cap: int = core.DEFAULT_ENUM_CAP
    label_cap: int = labellp.DEFAULT_LABEL_CAP
    opt_cap: int = distlp.DEFAULT_OPT_CAP
    csp_cap: int = csp_mod.DEFAULT_CSP_CAP
    mis_cap: int = uml.DEFAULT_MIS_CAP

    def __post_init__(self) -> None:
        for field in ("trials", "enum_cap", "label_cap", "opt_cap", "csp_cap", "mis_cap"):
            if getattr(self, field) <= 0:
                raise ParameterError(f"{field} must be positive")

    @classmethod
    def from_env(cls, environ=None) -> "RunConfig":
        env = os.environ if environ is None else environ
        kwargs = {}
        for field, var in (
            ("enum_cap", "DEMANDCUT_ENUM_CAP"),
            ("label_cap", "DEMANDCUT_LABEL_CAP"),
            ("opt_cap", "DEMANDCUT_OPT_CAP"),
            ("csp_cap", "DEMANDCUT_CSP_CAP"),
            ("mis_cap", "DEMANDCUT_MIS_CAP"),
        ):
            if var in env:
                try:
                    kwargs[field] = int(env[var])
                except ValueError:
                    raise ParameterError(f"{var} must be an integer") from None
        return cls(**kwargs)


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return handle.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path!r}: {exc}") from None


def _emit(doc: dict, fmt: str, human_lines) -> None:
    if fmt == "machine":
        sys.stdout.write(ser.dumps_canonical(doc))
    else:
        for line in human_lines(doc):
            print(line)


def _kv_lines(doc: dict):
    lines: list[str] = []

    def walk(prefix: str, value) -> None:
        if isinstance(value, dict):
            for key in sorted(value):
                walk(f"{prefix}.{key}" if prefix else str(key), value[key])
        elif isinstance(value, list):
            lines.append(f"{prefix} = {json.dumps(value)}")
        else:
            lines.append(f"{prefix} = {value}")

    walk("", doc)
    return lines


def cmd_validate(args, cfg) -> int:
    inst = ser.parse_instance(_read_text(args.file))
    report = core.validate_instance(inst)
    _emit(ser.validation_to_document(report), args.format, _kv_lines)
    return EXIT_OK if report.ok else EXIT_PARSE


def cmd_solve_lp(args, cfg) -> int:
    if args.formulation == "basic":
        inst_csp = ser.parse_csp(_read_text(args.file))
        lp = csp_mod.build_basic_lp(inst_csp)
        res = solve_lp(lp)
        if res.status != OPTIMAL:
            raise InfeasibleInputError(f"relaxation status: {res.status}")
        sol = csp_mod.basic_solution_from_result(inst_csp, res)
        doc = {
            "schema": "lp-value/1",
            "formulation": "basic",
            "value": res.objective_value,
            "solution": ser.basic_solution_to_document(sol, inst_csp.family.num_sources),
        }
        _emit(doc, args.format, _kv_lines)
        return EXIT_OK
    inst = ser.parse_instance(_read_text(args.file))
    if args.formulation == "distance":
        value, x = distlp.solve_distance_lp(inst)
        solution = ser.edge_solution_to_document(x)
    else:
        lp = labellp.build_label_lp(inst, label_cap=cfg.label_cap)
        res = solve_lp(lp)
        if res.status != OPTIMAL:
            raise InfeasibleInputError(f"relaxation status: {res.status}")
        value = res.objective_value
        solution = ser.label_solution_to_document(labellp.label_solution_from_result(inst, res))
    doc = {
        "schema": "lp-value/1",
        "formulation": args.formulation,
        "value": value,
        "solution": solution,
    }
    _emit(doc, args.format, _kv_lines)
    return EXIT_OK


def cmd_round_dir(args, cfg) -> int:
    inst = ser.parse_instance(_read_text(args.file))
    lp_value, x = distlp.solve_distance_lp(inst)
    outcome = rounding.derandomized_round(inst, x)
    doc = {
        "schema": ser.SCHEMA_ROUNDING,
        "lp_value": lp_value,
        "theta": outcome.theta,
        "cut": ser.cut_to_document(outcome.cut),
        "profile": {k: outcome.per_edge_profile[k] for k in sorted(outcome.per_edge_profile)},
    }
    _emit(doc, args.format, _kv_lines)
    return EXIT_OK


def cmd_solve_und(args, cfg) -> int:
    inst = ser.parse_instance(_read_text(args.file))
    cut = uml.solve_tk2(inst, args.t, trials=args.trials, seed=args.seed, mis_cap=cfg.mis_cap)
    _emit(ser.cut_to_document(cut), args.format, _kv_lines)
    return EXIT_OK


def cmd_reduce(args, cfg) -> int:
    if args.to == "csp":
        inst = ser.parse_instance(_read_text(args.file))
        if not args.no_preprocess:
            inst = csp_mod.preprocess_supply(inst)
        out = csp_mod.multicut_to_csp(inst)
        _emit(ser.csp_to_document(out), args.format, _kv_lines)
    else:
        inst_csp = ser.parse_csp(_read_text(args.file))
        out = csp_mod.csp_to_multicut(inst_csp)
        _emit(ser.instance_to_document(out), args.format, _kv_lines)
    return EXIT_OK


def cmd_translate(args, cfg) -> int:
    inst = ser.parse_instance(_read_text(args.file))
    sol_doc = json.loads(_read_text(args.solution))
    if args.direction == "dist2label":
        x = ser.document_to_edge_solution(sol_doc)
        out = labellp.distlp_to_label(inst, x)
        doc = ser.label_solution_to_document(out)
    elif args.direction == "label2dist":
        sol = ser.document_to_label_solution(sol_doc)
        x = labellp.label_to_distlp(inst, sol)
        doc = ser.edge_solution_to_document(x)
    elif args.direction == "label2basic":
        sol = ser.document_to_label_solution(sol_doc)
        basic = csp_mod.label_to_basic(inst, sol)
        doc = ser.basic_solution_to_document(
            basic, len(core.analyze_demand(inst.demand).sources)
        )
    else:  # basic2label
        basic = ser.document_to_basic_solution(sol_doc)
        sol = csp_mod.basic_to_label(inst, basic)
        doc = ser.label_solution_to_document(sol)
    _emit(doc, args.format, _kv_lines)
    return EXIT_OK


def cmd_gap(args, cfg) -> int:
    if args.search:
        best = None
        evaluated = 0
        for seed in range(args.seeds):
            inst = generate.gen_instance(
                seed=seed,
                n=args.n,
                k=args.k,
                edge_density=args.density,
                directedness=args.directedness,
                demand_shape=args.shape,
            )
            try:
                report = distlp.flow_cut_gap(inst, cap=cfg.opt_cap)
            except (NoFeasibleCutError, InfeasibleStructureError):
                continue
            evaluated += 1
            if best is None or report.ratio > best[1].ratio:
                best = (seed, report, inst)
        if best is None:
            raise NoFeasibleCutError("no seed produced a solvable instance")
        doc = {
            "schema": "gap-search/1",
            "seeds": args.seeds,
            "evaluated": evaluated,
            "best_seed": best[0],
            "report": ser.gap_to_document(best[1]),
            "instance": ser.instance_to_document(best[2]),
        }
        _emit(doc, args.format, _kv_lines)
        return EXIT_OK
    if args.file is None:
        raise ParameterError("gap needs an instance file unless --search is given")
    inst = ser.parse_instance(_read_text(args.file))
    report = distlp.flow_cut_gap(inst, cap=cfg.opt_cap)
    _emit(ser.gap_to_document(report), args.format, _kv_lines)
    return EXIT_OK


def cmd_decompose(args, cfg) -> int:
    inst = ser.parse_instance(_read_text(args.file))
    parts = core.decompose_bipartite(inst.demand)
    doc = {
        "schema": ser.SCHEMA_DECOMPOSITION,
        "parts": [
            ser.instance_to_document(
                core.MulticutInstance(inst.supply, part)
            )
            for part in parts
        ],
    }
    _emit(doc, args.format, _kv_lines)
    return EXIT_OK


def cmd_analyze(args, cfg) -> int:
    inst = ser.parse_instance(_read_text(args.file))
    if args.matching is not None:
        witness = core.find_induced_matching(inst.demand, args.matching, cap=cfg.enum_cap)
        doc = ser.witness_to_document("induced-matching", witness)
    else:
        witness = core.find_matching_extension(inst.demand, args.extension, cap=cfg.enum_cap)
        doc = ser.witness_to_document("matching-extension", witness)
    _emit(doc, args.format, _kv_lines)
    return EXIT_OK


def cmd_gen(args, cfg) -> int:
    inst = generate.gen_instance(
        seed=args.seed,
        n=args.n,
        k=args.k,
        edge_density=args.density,
        directedness=args.directedness,
        demand_shape=args.shape,
    )
    _emit(ser.instance_to_document(inst), args.format, _kv_lines)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="demandcut",
        description="Multicut relaxations, rounding, and predicate reductions",
    )
    parser.add_argument("--format", choices=("machine", "human"), default="machine")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check an instance document")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve-lp", help="solve one of the relaxations")
    p.add_argument("file")
    p.add_argument("--formulation", choices=("distance", "label", "basic"), required=True)
    p.set_defaults(func=cmd_solve_lp)

    p = sub.add_parser("round-dir", help="derandomized threshold rounding of the distance relaxation")
    p.add_argument("file")
    p.set_defaults(func=cmd_round_dir)

    p = sub.add_parser("solve-und", help="undirected pipeline via metric labeling")
    p.add_argument("file")
    p.add_argument("--t", type=int, required=True, help="forbidden induced matching size")
    p.add_argument("--trials", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_solve_und)

    p = sub.add_parser("reduce", help="reduce between multicut and predicate instances")
    p.add_argument("file")
    p.add_argument("--to", choices=("csp", "multicut"), required=True)
    p.add_argument("--no-preprocess", action="store_true",
                   help="assume the instance is already normalized")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("translate", help="translate solutions between relaxations")
    p.add_argument("file", help="instance document")
    p.add_argument("--direction", required=True,
                   choices=("label2basic", "basic2label", "dist2label", "label2dist"))
    p.add_argument("--solution", required=True, help="solution document")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("gap", help="flow-cut gap report (optionally a random search)")
    p.add_argument("file", nargs="?")
    p.add_argument("--search", action="store_true")
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--density", type=float, default=0.5)
    p.add_argument("--directedness", choices=generate.DIRECTEDNESS, default="directed")
    p.add_argument("--shape", choices=generate.DEMAND_SHAPES, default="random")
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("decompose", help="split the demand graph into bipartite parts")
    p.add_argument("file")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("analyze", help="witness searches on the demand graph")
    p.add_argument("file")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--matching", type=int)
    group.add_argument("--extension", type=int)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("gen", help="generate a seeded random instance")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--density", type=float, default=0.4)
    p.add_argument("--directedness", choices=generate.DIRECTEDNESS, default="directed")
    p.add_argument("--shape", choices=generate.DEMAND_SHAPES, default="random")
    p.set_defaults(func=cmd_gen)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.from_env()
        return args.func(args, cfg)
    except SizeGuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except _PARSE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except _INFEASIBLE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (NumericFailureError, DemandcutError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def entry() -> None:
    sys.exit(main())
