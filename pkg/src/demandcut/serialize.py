"""Canonical structured-text (JSON) documents for instances, solutions, and reports.

One container format serves every artifact: sorted keys, edges sorted by
id, weights rendered as decimal strings with the reserved token "inf" for
infinite weights.  Serialization is byte-stable after canonicalization and
`parse(serialize(x))` round-trips every generated instance.
"""

from __future__ import annotations

import json
import math
from typing import Any

from .core import INF, MulticutInstance, is_infinite, make_instance, validate_instance
from .csp import CSPInstance, CSPTuple, PredicateFamily
from .distlp import CutSolution, GapReport
from .errors import ParseError, ValidationError
from .labellp import LabelSolution
from .labels import label_from_str, label_str

SCHEMA_INSTANCE = "multicut-instance/1"
SCHEMA_CSP = "csp-instance/1"
SCHEMA_CUT = "cut/1"
SCHEMA_GAP = "gap-report/1"
SCHEMA_EDGE_SOLUTION = "edge-solution/1"
SCHEMA_LABEL_SOLUTION = "label-solution/1"
SCHEMA_BASIC_SOLUTION = "basic-solution/1"
SCHEMA_ROUNDING = "rounding/1"
SCHEMA_DECOMPOSITION = "decomposition/1"
SCHEMA_WITNESS = "witness/1"
SCHEMA_VALIDATION = "validation/1"


def format_weight(w: float) -> str:
    if is_infinite(w):
        return "inf"
    if float(w).is_integer():
        return str(int(w))
    return repr(float(w))


def parse_weight(value: Any, where: str) -> float:
    if isinstance(value, str):
        if value == "inf":
            return INF
        try:
            return float(value)
        except ValueError:
            raise ParseError(f"{where}: bad weight {value!r}") from None
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    raise ParseError(f"{where}: bad weight {value!r}")


def dumps_canonical(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _load(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ParseError("top-level document must be an object")
    return doc


def _expect(doc: dict, field: str, kind, where: str = "document"):
    if field not in doc:
        raise ParseError(f"{where}: missing field {field!r}")
    value = doc[field]
    if kind is not None and not isinstance(value, kind):
        raise ParseError(f"{where}: field {field!r} has wrong type")
    return value


def _check_schema(doc: dict, expected: str) -> None:
    schema = _expect(doc, "schema", str)
    if schema != expected:
        raise ParseError(f"expected schema {expected!r}, got {schema!r}")


# ---------------------------------------------------------------------------
# multicut instances


def instance_to_document(inst: MulticutInstance) -> dict:
    return {
        "schema": SCHEMA_INSTANCE,
        "vertices": list(inst.supply.vertices),
        "directed_edges": [
            {"id": e.id, "tail": e.tail, "head": e.head, "weight": format_weight(e.weight)}
            for e in sorted(inst.supply.directed_edges, key=lambda e: e.id)
        ],
        "undirected_edges": [
            {"id": e.id, "tail": e.tail, "head": e.head, "weight": format_weight(e.weight)}
            for e in sorted(inst.supply.undirected_edges, key=lambda e: e.id)
        ],
        "demands": [{"source": s, "sink": t} for s, t in inst.demand.edges],
    }


def document_to_instance(doc: dict) -> MulticutInstance:
    _check_schema(doc, SCHEMA_INSTANCE)
    vertices = _expect(doc, "vertices", list)
    directed = []
    for n, entry in enumerate(_expect(doc, "directed_edges", list)):
        where = f"directed_edges[{n}]"
        if not isinstance(entry, dict):
            raise ParseError(f"{where}: expected object")
        for field in ("tail", "head", "weight"):
            _expect(entry, field, None, where)
        for field in entry:
            if field not in ("id", "tail", "head", "weight"):
                raise ParseError(f"{where}: unknown field {field!r}")
        eid = entry.get("id", f"d{n}")
        directed.append((eid, entry["tail"], entry["head"], parse_weight(entry["weight"], where)))
    undirected = []
    for n, entry in enumerate(_expect(doc, "undirected_edges", list)):
        where = f"undirected_edges[{n}]"
        if not isinstance(entry, dict):
            raise ParseError(f"{where}: expected object")
        for field in ("tail", "head", "weight"):
            _expect(entry, field, None, where)
        for field in entry:
            if field not in ("id", "tail", "head", "weight"):
                raise ParseError(f"{where}: unknown field {field!r}")
        eid = entry.get("id", f"u{n}")
        undirected.append((eid, entry["tail"], entry["head"], parse_weight(entry["weight"], where)))
    demands = []
    for n, entry in enumerate(_expect(doc, "demands", list)):
        where = f"demands[{n}]"
        if not isinstance(entry, dict):
            raise ParseError(f"{where}: expected object")
        demands.append((_expect(entry, "source", str, where), _expect(entry, "sink", str, where)))
        for field in entry:
            if field not in ("source", "sink"):
                raise ParseError(f"{where}: unknown field {field!r}")
    inst = make_instance(vertices, directed=directed, undirected=undirected, demands=demands)
    report = validate_instance(inst)
    if not report.ok:
        raise ValidationError("; ".join(report.violations))
    return inst


def serialize_instance(inst: MulticutInstance) -> str:
    return dumps_canonical(instance_to_document(inst))


def parse_instance(text: str) -> MulticutInstance:
    return document_to_instance(_load(text))


# ---------------------------------------------------------------------------
# predicate instances


def csp_to_document(csp: CSPInstance) -> dict:
    fam = csp.family
    return {
        "schema": SCHEMA_CSP,
        "family": {
            "p": fam.num_sources,
            "q": fam.num_sinks,
            "Y": [sorted(i + 1 for i in s) for s in fam.dominated_sources],
            "Z": [sorted(i + 1 for i in s) for s in fam.allowed_sources],
        },
        "vertices": list(csp.vertices),
        "tuples": [
            {
                "vertices": list(t.vertices),
                "predicate": t.predicate,
                "weight": format_weight(t.weight),
            }
            for t in csp.tuples
        ],
    }


def document_to_csp(doc: dict) -> CSPInstance:
    _check_schema(doc, SCHEMA_CSP)
    fam_doc = _expect(doc, "family", dict)
    p = _expect(fam_doc, "p", int, "family")
    q = _expect(fam_doc, "q", int, "family")
    y_sets = _expect(fam_doc, "Y", list, "family")
    z_sets = _expect(fam_doc, "Z", list, "family")
    if len(y_sets) != p or len(z_sets) != q:
        raise ParseError("family: Y/Z lengths do not match p/q")

    def to_set(raw, where):
        if not isinstance(raw, list) or any(not isinstance(i, int) for i in raw):
            raise ParseError(f"{where}: expected a list of 1-based indices")
        return frozenset(i - 1 for i in raw)

    family = PredicateFamily(
        num_sources=p,
        num_sinks=q,
        dominated_sources=tuple(to_set(s, f"family.Y[{n}]") for n, s in enumerate(y_sets)),
        allowed_sources=tuple(to_set(s, f"family.Z[{n}]") for n, s in enumerate(z_sets)),
    )
    vertices = tuple(str(v) for v in _expect(doc, "vertices", list))
    tuples = []
    for n, entry in enumerate(_expect(doc, "tuples", list)):
        where = f"tuples[{n}]"
        if not isinstance(entry, dict):
            raise ParseError(f"{where}: expected object")
        verts = _expect(entry, "vertices", list, where)
        pred = _expect(entry, "predicate", str, where)
        weight = parse_weight(_expect(entry, "weight", None, where), where)
        tuples.append(CSPTuple(tuple(str(v) for v in verts), pred, weight))
    return CSPInstance(family, vertices, tuple(tuples))


def serialize_csp(csp: CSPInstance) -> str:
    return dumps_canonical(csp_to_document(csp))


def parse_csp(text: str) -> CSPInstance:
    return document_to_csp(_load(text))


# ---------------------------------------------------------------------------
# solutions, cuts, and reports


def cut_to_document(cut: CutSolution) -> dict:
    return {"schema": SCHEMA_CUT, "edges": sorted(cut.edges), "cost": cut.cost}


def gap_to_document(report: GapReport) -> dict:
    return {
        "schema": SCHEMA_GAP,
        "lp_value": report.lp_value,
        "opt_value": report.opt_value,
        "ratio": report.ratio,
        "opt_cut": cut_to_document(report.opt_cut),
    }


def edge_solution_to_document(x: dict[str, float]) -> dict:
    return {"schema": SCHEMA_EDGE_SOLUTION, "x": {k: x[k] for k in sorted(x)}}


def document_to_edge_solution(doc: dict) -> dict[str, float]:
    _check_schema(doc, SCHEMA_EDGE_SOLUTION)
    raw = _expect(doc, "x", dict)
    return {str(k): float(v) for k, v in raw.items()}


def label_solution_to_document(sol: LabelSolution) -> dict:
    k = sol.num_terminals
    return {
        "schema": SCHEMA_LABEL_SOLUTION,
        "terminals": list(sol.terminals),
        "vertex": {
            v: {label_str(lab, k): mass for lab, mass in sorted(dist.items())}
            for v, dist in sol.vertex_dist.items()
        },
        "edges": {
            eid: {
                f"{label_str(l1, k)}|{label_str(l2, k)}": mass
                for (l1, l2), mass in sorted(joint.items())
            }
            for eid, joint in sol.edge_joint.items()
        },
        "x": {k2: sol.x[k2] for k2 in sorted(sol.x)},
    }


def document_to_label_solution(doc: dict) -> LabelSolution:
    _check_schema(doc, SCHEMA_LABEL_SOLUTION)
    terminals = tuple(str(t) for t in _expect(doc, "terminals", list))
    vertex = {}
    for v, dist in _expect(doc, "vertex", dict).items():
        vertex[str(v)] = {label_from_str(bits): float(m) for bits, m in dist.items()}
    edges = {}
    for eid, joint in _expect(doc, "edges", dict).items():
        out = {}
        for key, mass in joint.items():
            try:
                left, right = key.split("|")
            except ValueError:
                raise ParseError(f"edges[{eid!r}]: bad joint key {key!r}") from None
            out[(label_from_str(left), label_from_str(right))] = float(mass)
        edges[str(eid)] = out
    x = {str(k): float(v) for k, v in _expect(doc, "x", dict).items()}
    return LabelSolution(terminals, vertex, edges, x)


def basic_solution_to_document(sol, p: int) -> dict:
    return {
        "schema": SCHEMA_BASIC_SOLUTION,
        "p": p,
        "vertex": {
            v: {label_str(lab, p): mass for lab, mass in sorted(dist.items())}
            for v, dist in sol.vertex_dist.items()
        },
        "tuples": [
            {"|".join(label_str(a, p) for a in alpha): mass for alpha, mass in sorted(dist.items())}
            for dist in sol.tuple_dist
        ],
    }


def document_to_basic_solution(doc: dict):
    from .csp import BasicSolution

    _check_schema(doc, SCHEMA_BASIC_SOLUTION)
    vertex = {}
    for v, dist in _expect(doc, "vertex", dict).items():
        vertex[str(v)] = {label_from_str(bits): float(m) for bits, m in dist.items()}
    tuples = []
    for entry in _expect(doc, "tuples", list):
        if not isinstance(entry, dict):
            raise ParseError("tuples: expected objects")
        dist = {}
        for key, mass in entry.items():
            alpha = tuple(label_from_str(part) for part in key.split("|"))
            dist[alpha] = float(mass)
        tuples.append(dist)
    return BasicSolution(vertex, tuple(tuples))


def witness_to_document(kind: str, witness) -> dict:
    doc: dict = {"schema": SCHEMA_WITNESS, "kind": kind}
    if witness is None:
        doc["witness"] = None
    elif kind == "induced-matching":
        doc["witness"] = [{"source": s, "sink": t} for s, t in witness]
    else:
        doc["witness"] = {"s_list": list(witness.s_list), "t_list": list(witness.t_list)}
    return doc


def validation_to_document(report) -> dict:
    return {
        "schema": SCHEMA_VALIDATION,
        "ok": report.ok,
        "violations": list(report.violations),
    }
