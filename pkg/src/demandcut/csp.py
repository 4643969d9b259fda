"""Predicate-family encoding of multicut with a bipartite demand pattern.

A bipartite demand graph (sources a_1..a_p, sinks b_1..b_q, all edges
source -> sink) induces a family of predicates over p-bit labels, where a
label records which sources can reach a vertex:

* unary tables pin each terminal's label: a_i must read exactly the set of
  sources it dominates, b_j exactly the set of sources allowed to keep
  reaching it;
* a binary order predicate charges a directed edge whose tail label is not
  componentwise below its head label;
* a binary inequality predicate (NAE2) charges an undirected edge with
  differently labelled endpoints.

With the supply graph normalized first (terminals relocated onto fresh
vertices, plus infinite edges wiring the domination/allowance structure),
minimizing the weighted predicate cost is the same problem as the cut, and
the standard per-tuple relaxation exchanges solutions with the label
relaxation in both directions by projecting sink bits out or re-inserting
them as all-ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from itertools import product

import numpy as np

from .core import (
    INF,
    DemandAnalysis,
    DemandGraph,
    MulticutInstance,
    analyze_demand,
    is_infinite,
    make_instance,
    validate_instance,
)
from .errors import (
    AssumptionViolationError,
    InfeasibleInputError,
    MalformedFamilyError,
    NoFiniteAssignmentError,
    SizeGuardError,
    ValidationError,
)
from .labellp import LabelSolution, check_label_solution
from .labels import label_bit, label_leq, label_str
from .lp import LinearProgram, LPResult

#: default cap on enumerated assignments in the brute-force oracle
DEFAULT_CSP_CAP = 10_000_000

#: dense unary tables keep 2^p entries per predicate
MAX_SOURCES = 8

_MASS_EPS = 1e-15


@dataclass(frozen=True)
class PredicateFamily:
    """Predicates over labels in {0,1}^p for a fixed bipartite demand pattern."""

    num_sources: int
    num_sinks: int
    dominated_sources: tuple[frozenset[int], ...]
    allowed_sources: tuple[frozenset[int], ...]

    @property
    def num_labels(self) -> int:
        return 1 << self.num_sources

    def _label_of(self, positions: frozenset[int]) -> int:
        p = self.num_sources
        out = 0
        for i in positions:
            out |= 1 << (p - 1 - i)
        return out

    @cached_property
    def source_labels(self) -> tuple[int, ...]:
        return tuple(self._label_of(s) for s in self.dominated_sources)

    @cached_property
    def sink_labels(self) -> tuple[int, ...]:
        return tuple(self._label_of(s) for s in self.allowed_sources)

    @cached_property
    def source_tables(self) -> tuple[tuple[float, ...], ...]:
        return tuple(
            tuple(0.0 if sigma == pin else INF for sigma in range(self.num_labels))
            for pin in self.source_labels
        )

    @cached_property
    def sink_tables(self) -> tuple[tuple[float, ...], ...]:
        return tuple(
            tuple(0.0 if sigma == pin else INF for sigma in range(self.num_labels))
            for pin in self.sink_labels
        )

    @classmethod
    def from_analysis(cls, analysis: DemandAnalysis) -> "PredicateFamily":
        return cls(
            num_sources=len(analysis.sources),
            num_sinks=len(analysis.sinks),
            dominated_sources=analysis.dominated_sources,
            allowed_sources=analysis.allowed_sources,
        )

    def predicate_names(self) -> list[str]:
        return (
            ["C", "NAE2"]
            + [f"psi_a:{i + 1}" for i in range(self.num_sources)]
            + [f"psi_b:{j + 1}" for j in range(self.num_sinks)]
        )

    def arity(self, predicate: str) -> int:
        if predicate in ("C", "NAE2"):
            return 2
        if predicate.startswith("psi_a:") or predicate.startswith("psi_b:"):
            return 1
        raise MalformedFamilyError(f"unknown predicate {predicate!r}")

    def unary_table(self, predicate: str) -> tuple[float, ...]:
        kind, _, idx = predicate.partition(":")
        n = int(idx) - 1
        if kind == "psi_a" and 0 <= n < self.num_sources:
            return self.source_tables[n]
        if kind == "psi_b" and 0 <= n < self.num_sinks:
            return self.sink_tables[n]
        raise MalformedFamilyError(f"unknown unary predicate {predicate!r}")

    def evaluate(self, predicate: str, labels) -> float:
        if predicate == "C":
            l1, l2 = labels
            return 0.0 if label_leq(l1, l2) else 1.0
        if predicate == "NAE2":
            l1, l2 = labels
            return 0.0 if l1 == l2 else 1.0
        (sigma,) = labels
        return self.unary_table(predicate)[sigma]

    def violations(self) -> list[str]:
        """Consistency of the structure sets with the demand pattern they encode."""
        out: list[str] = []
        p, q = self.num_sources, self.num_sinks
        if p > MAX_SOURCES:
            out.append(f"{p} sources exceed the dense-table limit {MAX_SOURCES}")
            return out
        if len(self.dominated_sources) != p or len(self.allowed_sources) != q:
            out.append("structure set counts do not match p/q")
            return out
        for i, s in enumerate(self.dominated_sources):
            if not s <= frozenset(range(p)) or i not in s:
                out.append(f"dominated set {i} malformed")
        for j, s in enumerate(self.allowed_sources):
            if not s <= frozenset(range(p)):
                out.append(f"allowed set {j} out of range")
        if out:
            return out
        edges = {
            (i, j)
            for j in range(q)
            for i in range(p)
            if i not in self.allowed_sources[j]
        }
        nb = [frozenset(j for j in range(q) if (i, j) in edges) for i in range(p)]
        dominated = tuple(
            frozenset(i2 for i2 in range(p) if nb[i2] <= nb[i]) for i in range(p)
        )
        if dominated != self.dominated_sources:
            out.append("dominated sets inconsistent with the demand pattern")
        return out


def build_predicate_family(H: DemandGraph) -> PredicateFamily:
    """Predicate family for a bipartite demand graph (raises NotBipartiteError)."""
    return PredicateFamily.from_analysis(analyze_demand(H))


@dataclass(frozen=True)
class CSPTuple:
    vertices: tuple[str, ...]
    predicate: str
    weight: float


@dataclass(frozen=True)
class CSPInstance:
    family: PredicateFamily
    vertices: tuple[str, ...]
    tuples: tuple[CSPTuple, ...]


def csp_violations(csp: CSPInstance) -> list[str]:
    out = list(csp.family.violations())
    vset = set(csp.vertices)
    for n, t in enumerate(csp.tuples):
        try:
            arity = csp.family.arity(t.predicate)
        except MalformedFamilyError as exc:
            out.append(f"tuple {n}: {exc}")
            continue
        if len(t.vertices) != arity:
            out.append(f"tuple {n}: arity {len(t.vertices)} != {arity} of {t.predicate}")
        if any(v not in vset for v in t.vertices):
            out.append(f"tuple {n}: unknown vertex")
        if math.isnan(t.weight) or t.weight < 0:
            out.append(f"tuple {n}: negative weight")
        if t.predicate.startswith("psi"):
            # force an index check
            try:
                csp.family.unary_table(t.predicate)
            except MalformedFamilyError as exc:
                out.append(f"tuple {n}: {exc}")
    return out


def assignment_cost(csp: CSPInstance, assignment: dict[str, int]) -> float:
    """Total weighted predicate cost; infinite table entries are hard constraints."""
    total = 0.0
    for t in csp.tuples:
        val = csp.family.evaluate(t.predicate, tuple(assignment[v] for v in t.vertices))
        if math.isinf(val):
            return INF
        if val > 0 and is_infinite(t.weight):
            return INF
        total += t.weight * val if val else 0.0
    return total


# ---------------------------------------------------------------------------
# supply-graph normalization


def _fresh_name(base: str, used: set[str]) -> str:
    name = base
    while name in used:
        name += "_"
    used.add(name)
    return name


def undirected_gadget(inst: MulticutInstance) -> MulticutInstance:
    """Replace each undirected edge by a directed widget preserving cut optima.

    An undirected edge {u, v} of weight w becomes fresh vertices x, y with
    infinite edges u->x, v->x, y->u, y->v and a single finite edge x->y of
    weight w (keeping the original edge id).  Both traversal directions run
    through x->y, so cutting it removes them together at cost w, and
    leaving it keeps both.
    """
    if not inst.supply.undirected_edges:
        return inst
    vertices = list(inst.supply.vertices)
    used = set(vertices)
    ids = {e.id for e in inst.supply.edges}
    directed = [(e.id, e.tail, e.head, e.weight) for e in inst.supply.directed_edges]

    def fresh_id(base: str) -> str:
        eid = base
        while eid in ids:
            eid += "_"
        ids.add(eid)
        return eid

    for e in inst.supply.undirected_edges:
        x = _fresh_name(f"__g{e.id}x", used)
        y = _fresh_name(f"__g{e.id}y", used)
        vertices.extend([x, y])
        directed.append((fresh_id(f"{e.id}.in1"), e.tail, x, INF))
        directed.append((fresh_id(f"{e.id}.in2"), e.head, x, INF))
        directed.append((fresh_id(f"{e.id}.out1"), y, e.tail, INF))
        directed.append((fresh_id(f"{e.id}.out2"), y, e.head, INF))
        directed.append((e.id, x, y, e.weight))
    return make_instance(
        vertices,
        directed=directed,
        demands=inst.demand.edges,
        terminals=inst.demand.terminals,
    )


def preprocess_supply(inst: MulticutInstance) -> MulticutInstance:
    """Relocate terminals onto fresh vertices and wire the structure edges.

    Each source terminal moves to a fresh vertex with a single infinite
    edge into its original position; each sink gains a fresh vertex fed by
    a single infinite edge.  Then, for every dominated source pair an
    infinite edge runs dominated -> dominating, and every allowed
    source/sink pair gets an infinite edge source -> sink.  Neither change
    affects cut or relaxation optima: the new edges cannot be cut and
    introduce no path between any demand pair.
    """
    analysis = analyze_demand(inst.demand)
    vertices = list(inst.supply.vertices)
    used = set(vertices)
    ids = {e.id for e in inst.supply.edges}
    directed = [(e.id, e.tail, e.head, e.weight) for e in inst.supply.directed_edges]
    undirected = [(e.id, e.tail, e.head, e.weight) for e in inst.supply.undirected_edges]

    def fresh_id(base: str) -> str:
        eid = base
        while eid in ids:
            eid += "_"
        ids.add(eid)
        return eid

    src_terms: list[str] = []
    for i, s in enumerate(analysis.sources):
        a = _fresh_name(f"__a{i + 1}", used)
        vertices.append(a)
        src_terms.append(a)
        directed.append((fresh_id(f"att_a{i + 1}"), a, s, INF))
    sink_terms: list[str] = []
    for j, t in enumerate(analysis.sinks):
        b = _fresh_name(f"__b{j + 1}", used)
        vertices.append(b)
        sink_terms.append(b)
        directed.append((fresh_id(f"att_b{j + 1}"), t, b, INF))
    for i in range(len(src_terms)):
        for i2 in sorted(analysis.dominated_sources[i]):
            if i2 != i:
                directed.append((fresh_id(f"dom{i2 + 1}.{i + 1}"), src_terms[i2], src_terms[i], INF))
    for j in range(len(sink_terms)):
        for i in sorted(analysis.allowed_sources[j]):
            directed.append((fresh_id(f"adm{i + 1}.{j + 1}"), src_terms[i], sink_terms[j], INF))
    demands = [
        (src_terms[analysis.source_index[s]], sink_terms[analysis.sink_index[t]])
        for s, t in inst.demand.edges
    ]
    return make_instance(
        vertices,
        directed=directed,
        undirected=undirected,
        demands=demands,
        terminals=src_terms + sink_terms,
    )


def assumption_violations(inst: MulticutInstance) -> tuple[DemandAnalysis, list[str]]:
    """Check the normalized-supply conditions needed by the cut -> CSP direction."""
    analysis = analyze_demand(inst.demand)
    out: list[str] = []
    src = analysis.sources
    snk = analysis.sinks
    src_idx = analysis.source_index
    snk_idx = analysis.sink_index
    terms = set(src) | set(snk)
    inf_directed = {
        (e.tail, e.head)
        for e in inst.supply.directed_edges
        if is_infinite(e.weight)
    }
    implied = set()
    for i, a in enumerate(src):
        for i2 in analysis.dominated_sources[i]:
            if i2 != i:
                implied.add((src[i2], a))
    for j, b in enumerate(snk):
        for i in analysis.allowed_sources[j]:
            implied.add((src[i], b))
    for pair in implied:
        if pair not in inf_directed:
            out.append(f"missing infinite structure edge {pair[0]!r} -> {pair[1]!r}")
    for e in inst.supply.directed_edges:
        if e.tail in terms and e.head in terms and is_infinite(e.weight):
            if (e.tail, e.head) not in implied:
                out.append(f"unexpected infinite terminal edge {e.id!r}")
    for e in inst.supply.directed_edges:
        if e.tail in snk_idx:
            out.append(f"sink terminal {e.tail!r} has outgoing edge {e.id!r}")
        if e.head in src_idx and (e.tail, e.head) not in implied:
            out.append(f"source terminal {e.head!r} has extra incoming edge {e.id!r}")
    for e in inst.supply.undirected_edges:
        for v in e.endpoints:
            if v in terms and not is_infinite(e.weight):
                out.append(f"terminal {v!r} touches finite undirected edge {e.id!r}")
    return analysis, out


# ---------------------------------------------------------------------------
# the two reductions


def _multicut_to_csp_mapped(inst: MulticutInstance):
    report = validate_instance(inst)
    if not report.ok:
        raise ValidationError("; ".join(report.violations))
    analysis, viol = assumption_violations(inst)
    if viol:
        raise AssumptionViolationError("; ".join(viol))
    family = PredicateFamily.from_analysis(analysis)
    fam_viol = family.violations()
    if fam_viol:
        raise MalformedFamilyError("; ".join(fam_viol))
    terms = set(analysis.sources) | set(analysis.sinks)
    tuples: list[CSPTuple] = []
    origin: list[str | None] = []
    for i, a in enumerate(analysis.sources):
        tuples.append(CSPTuple((a,), f"psi_a:{i + 1}", 1.0))
        origin.append(None)
    for j, b in enumerate(analysis.sinks):
        tuples.append(CSPTuple((b,), f"psi_b:{j + 1}", 1.0))
        origin.append(None)
    for e in inst.supply.directed_edges:
        if is_infinite(e.weight) and e.tail in terms and e.head in terms:
            continue  # already encoded by the structure sets
        tuples.append(CSPTuple((e.tail, e.head), "C", e.weight))
        origin.append(e.id)
    for e in inst.supply.undirected_edges:
        tuples.append(CSPTuple((e.tail, e.head), "NAE2", e.weight))
        origin.append(e.id)
    csp = CSPInstance(family, inst.supply.vertices, tuple(tuples))
    return csp, tuple(origin), analysis


def multicut_to_csp(inst: MulticutInstance) -> CSPInstance:
    """Encode a normalized instance as a weighted predicate minimization.

    Terminals get unit-weight unary tuples, finite directed edges order
    tuples with the edge weight, undirected edges inequality tuples, and
    infinite attachment edges become infinite-weight order tuples.  The
    infinite terminal-to-terminal structure edges are not emitted: the
    unary tables already pin both endpoint labels consistently.
    """
    csp, _, _ = _multicut_to_csp_mapped(inst)
    return csp


def csp_to_multicut(csp: CSPInstance) -> MulticutInstance:
    """Realize a predicate instance as a multicut instance on the same vertices.

    The first unary tuple mentioning each terminal predicate names that
    terminal's representative vertex (fresh zero-weight dummies are
    injected when a predicate never occurs or its vertices are taken);
    duplicate unary tuples become infinite undirected attachment edges,
    order tuples directed edges, inequality tuples undirected edges, and
    the structure edges are wired per the family.
    """
    problems = csp_violations(csp)
    if problems:
        raise MalformedFamilyError("; ".join(problems))
    fam = csp.family
    p, q = fam.num_sources, fam.num_sinks
    if p == 0 or q == 0:
        raise MalformedFamilyError("family must have at least one source and one sink")
    for j in range(q):
        if fam.allowed_sources[j] == frozenset(range(p)):
            raise MalformedFamilyError(f"sink {j + 1} is not demanded by any source")

    rep_a: list[str | None] = [None] * p
    rep_b: list[str | None] = [None] * q
    taken: set[str] = set()
    for t in csp.tuples:
        kind, _, idx = t.predicate.partition(":")
        if kind not in ("psi_a", "psi_b"):
            continue
        n = int(idx) - 1
        reps = rep_a if kind == "psi_a" else rep_b
        v = t.vertices[0]
        if reps[n] is None and v not in taken:
            reps[n] = v
            taken.add(v)

    vertices = list(csp.vertices)
    used = set(vertices)
    all_tuples = list(csp.tuples)
    for n in range(p):
        if rep_a[n] is None:
            v = _fresh_name(f"__rep_a{n + 1}", used)
            vertices.append(v)
            taken.add(v)
            rep_a[n] = v
            all_tuples.append(CSPTuple((v,), f"psi_a:{n + 1}", 0.0))
    for n in range(q):
        if rep_b[n] is None:
            v = _fresh_name(f"__rep_b{n + 1}", used)
            vertices.append(v)
            taken.add(v)
            rep_b[n] = v
            all_tuples.append(CSPTuple((v,), f"psi_b:{n + 1}", 0.0))

    directed: list[tuple[str, str, str, float]] = []
    undirected: list[tuple[str, str, str, float]] = []
    rep_of = {f"psi_a:{n + 1}": rep_a[n] for n in range(p)}
    rep_of.update({f"psi_b:{n + 1}": rep_b[n] for n in range(q)})
    for n, t in enumerate(all_tuples):
        eid = f"t{n}"
        if t.predicate == "C":
            directed.append((eid, t.vertices[0], t.vertices[1], t.weight))
        elif t.predicate == "NAE2":
            undirected.append((eid, t.vertices[0], t.vertices[1], t.weight))
        else:
            rep = rep_of[t.predicate]
            if t.vertices[0] != rep:
                undirected.append((eid, rep, t.vertices[0], INF))
    for i in range(p):
        for i2 in sorted(fam.dominated_sources[i]):
            if i2 != i:
                directed.append((f"dom{i2 + 1}.{i + 1}", rep_a[i2], rep_a[i], INF))
    for j in range(q):
        for i in sorted(fam.allowed_sources[j]):
            directed.append((f"adm{i + 1}.{j + 1}", rep_a[i], rep_b[j], INF))
    demands = [
        (rep_a[i], rep_b[j])
        for j in range(q)
        for i in range(p)
        if i not in fam.allowed_sources[j]
    ]
    return make_instance(
        vertices,
        directed=directed,
        undirected=undirected,
        demands=demands,
        terminals=list(rep_a) + list(rep_b),
    )


# ---------------------------------------------------------------------------
# the per-tuple relaxation


@dataclass
class BasicSolution:
    vertex_dist: dict[str, dict[int, float]]
    tuple_dist: tuple[dict[tuple[int, ...], float], ...]


def build_basic_lp(csp: CSPInstance, guard: int = 4 ** MAX_SOURCES) -> LinearProgram:
    """Per-vertex label distributions with marginal-consistent tuple joints.

    Joint entries whose predicate value is infinite (or whose tuple weight
    is infinite at a positive predicate value) are fixed to zero; the
    objective sums the finite weighted terms.
    """
    problems = csp_violations(csp)
    if problems:
        raise ValidationError("; ".join(problems))
    fam = csp.family
    nl = fam.num_labels
    p = fam.num_sources
    max_arity = max((len(t.vertices) for t in csp.tuples), default=1)
    if nl ** max_arity > guard:
        raise SizeGuardError(f"{nl}^{max_arity} joint labels exceed guard {guard}")

    lp = LinearProgram()
    for v in csp.vertices:
        for sigma in range(nl):
            lp.add_variable(f"z({v}.{label_str(sigma, p)})", 0.0, 1.0)
        lp.add_constraint(
            {f"z({v}.{label_str(sigma, p)})": 1.0 for sigma in range(nl)}, "=", 1.0
        )
    for n, t in enumerate(csp.tuples):
        arity = len(t.vertices)
        for alpha in product(range(nl), repeat=arity):
            val = fam.evaluate(t.predicate, alpha)
            hard = math.isinf(val) or (is_infinite(t.weight) and val > 0)
            name = _joint_name(n, alpha, p)
            if hard:
                lp.add_variable(name, 0.0, 0.0)
            else:
                lp.add_variable(name, 0.0, 1.0, objective=t.weight * val if val else 0.0)
        for pos, v in enumerate(t.vertices):
            for sigma in range(nl):
                coeffs = {
                    _joint_name(n, alpha, p): 1.0
                    for alpha in product(range(nl), repeat=arity)
                    if alpha[pos] == sigma
                }
                coeffs[f"z({v}.{label_str(sigma, p)})"] = -1.0
                lp.add_constraint(coeffs, "=", 0.0)
    return lp


def _joint_name(n: int, alpha, p: int) -> str:
    return f"t({n}." + ".".join(label_str(a, p) for a in alpha) + ")"


def basic_solution_from_result(csp: CSPInstance, result: LPResult) -> BasicSolution:
    p = csp.family.num_sources
    nl = csp.family.num_labels
    vertex_dist = {}
    for v in csp.vertices:
        dist = {}
        for sigma in range(nl):
            mass = result.values[f"z({v}.{label_str(sigma, p)})"]
            if mass > _MASS_EPS:
                dist[sigma] = mass
        vertex_dist[v] = dist
    tuple_dist = []
    for n, t in enumerate(csp.tuples):
        arity = len(t.vertices)
        dist = {}
        for alpha in product(range(nl), repeat=arity):
            mass = result.values[_joint_name(n, alpha, p)]
            if mass > _MASS_EPS:
                dist[alpha] = mass
        tuple_dist.append(dist)
    return BasicSolution(vertex_dist, tuple(tuple_dist))


def basic_cost(csp: CSPInstance, sol: BasicSolution, tol: float = 1e-9) -> float:
    total = 0.0
    for t, dist in zip(csp.tuples, sol.tuple_dist):
        for alpha, mass in dist.items():
            if mass <= 0:
                continue
            val = csp.family.evaluate(t.predicate, alpha)
            if math.isinf(val) or (is_infinite(t.weight) and val > 0):
                if mass > tol:
                    return INF
                continue
            total += t.weight * val * mass if val else 0.0
    return total


def check_basic_solution(csp: CSPInstance, sol: BasicSolution, tol: float = 1e-8) -> list[str]:
    out: list[str] = []
    for v in csp.vertices:
        dist = sol.vertex_dist.get(v)
        if dist is None:
            out.append(f"vertex {v!r}: missing distribution")
            continue
        if abs(sum(dist.values()) - 1.0) > tol:
            out.append(f"vertex {v!r}: mass {sum(dist.values())} != 1")
        if any(m < -tol for m in dist.values()):
            out.append(f"vertex {v!r}: negative mass")
    if len(sol.tuple_dist) != len(csp.tuples):
        out.append("tuple distribution count mismatch")
        return out
    for n, (t, dist) in enumerate(zip(csp.tuples, sol.tuple_dist)):
        if any(m < -tol for m in dist.values()):
            out.append(f"tuple {n}: negative mass")
        for pos, v in enumerate(t.vertices):
            marg: dict[int, float] = {}
            for alpha, mass in dist.items():
                marg[alpha[pos]] = marg.get(alpha[pos], 0.0) + mass
            vdist = sol.vertex_dist.get(v, {})
            for sigma in set(marg) | set(vdist):
                if abs(marg.get(sigma, 0.0) - vdist.get(sigma, 0.0)) > tol:
                    out.append(f"tuple {n}: marginal at position {pos} off")
                    break
    return out


# ---------------------------------------------------------------------------
# solution translations between the label and per-tuple relaxations


def _source_positions(inst: MulticutInstance, analysis: DemandAnalysis) -> list[int]:
    order = {t: i for i, t in enumerate(inst.demand.terminals)}
    return [order[s] for s in analysis.sources]


def _sink_positions(inst: MulticutInstance, analysis: DemandAnalysis) -> list[int]:
    order = {t: i for i, t in enumerate(inst.demand.terminals)}
    return [order[t] for t in analysis.sinks]


def label_to_basic(inst: MulticutInstance, sol: LabelSolution, tol: float = 1e-6) -> BasicSolution:
    """Project a label solution down to source bits.

    Vertex masses aggregate over sink bits; unary tuples copy their
    vertex's projected distribution; binary tuples aggregate the edge
    joint the same way.  The projected cost never exceeds the original:
    order violations and inequalities can only disappear under projection.
    """
    csp, origin, analysis = _multicut_to_csp_mapped(inst)
    problems = check_label_solution(inst, sol, tol=tol)
    if problems:
        raise InfeasibleInputError("; ".join(problems[:5]))
    k = len(inst.demand.terminals)
    p = len(analysis.sources)
    src_pos = _source_positions(inst, analysis)

    def project(full: int) -> int:
        out = 0
        for n, pos in enumerate(src_pos):
            if label_bit(full, pos, k):
                out |= 1 << (p - 1 - n)
        return out

    vertex_dist: dict[str, dict[int, float]] = {}
    for v in inst.supply.vertices:
        acc: dict[int, float] = {}
        for full, mass in sol.vertex_dist[v].items():
            sigma = project(full)
            acc[sigma] = acc.get(sigma, 0.0) + mass
        vertex_dist[v] = acc
    tuple_dist = []
    for n, t in enumerate(csp.tuples):
        if origin[n] is None:
            tuple_dist.append({(sigma,): m for sigma, m in vertex_dist[t.vertices[0]].items()})
        else:
            joint = sol.edge_joint[origin[n]]
            acc2: dict[tuple[int, int], float] = {}
            for (l1, l2), mass in joint.items():
                key = (project(l1), project(l2))
                acc2[key] = acc2.get(key, 0.0) + mass
            tuple_dist.append(acc2)
    return BasicSolution(vertex_dist, tuple(tuple_dist))


def basic_to_label(inst: MulticutInstance, sol: BasicSolution, tol: float = 1e-6) -> LabelSolution:
    """Extend a per-tuple solution to full labels with all-ones sink bits.

    Tuple joints lift onto their edges; the structure edges (which have no
    tuples) receive the product of their endpoints' pinned labels.  The
    lifted cost equals the original: concatenating a shared sink suffix
    changes neither order violations nor inequalities.
    """
    csp, origin, analysis = _multicut_to_csp_mapped(inst)
    problems = check_basic_solution(csp, sol, tol=tol)
    if problems:
        raise InfeasibleInputError("; ".join(problems[:5]))
    cost = basic_cost(csp, sol)
    if math.isinf(cost):
        raise InfeasibleInputError("per-tuple solution has infinite cost")
    k = len(inst.demand.terminals)
    p = len(analysis.sources)
    src_pos = _source_positions(inst, analysis)
    sink_pos = _sink_positions(inst, analysis)

    def lift(sigma: int) -> int:
        full = 0
        for n, pos in enumerate(src_pos):
            if (sigma >> (p - 1 - n)) & 1:
                full |= 1 << (k - 1 - pos)
        for pos in sink_pos:
            full |= 1 << (k - 1 - pos)
        return full

    vertex_dist: dict[str, dict[int, float]] = {}
    for v in inst.supply.vertices:
        vertex_dist[v] = {lift(sigma): m for sigma, m in sol.vertex_dist[v].items()}

    edge_joint: dict[str, dict[tuple[int, int], float]] = {}
    for n, t in enumerate(csp.tuples):
        eid = origin[n]
        if eid is None:
            continue
        joint = {}
        for alpha, mass in sol.tuple_dist[n].items():
            joint[(lift(alpha[0]), lift(alpha[1]))] = mass
        edge_joint[eid] = joint
    for e in inst.supply.edges:
        if e.id in edge_joint:
            continue
        pair = []
        for v in (e.tail, e.head):
            dist = vertex_dist[v]
            lab, mass = max(dist.items(), key=lambda item: item[1])
            if mass < 1.0 - tol:
                raise InfeasibleInputError(
                    f"structure edge endpoint {v!r} is not integrally labelled"
                )
            pair.append(lab)
        edge_joint[e.id] = {(pair[0], pair[1]): 1.0}

    x: dict[str, float] = {}
    for e in inst.supply.edges:
        joint = edge_joint[e.id]
        if e.directed:
            charge = sum(m for (l1, l2), m in joint.items() if not label_leq(l1, l2))
        else:
            charge = sum(m for (l1, l2), m in joint.items() if l1 != l2)
        x[e.id] = 0.0 if charge < 1e-12 else min(1.0, charge)
    return LabelSolution(inst.demand.terminals, vertex_dist, edge_joint, x)


# ---------------------------------------------------------------------------
# brute-force oracle


def brute_force_csp(csp: CSPInstance, cap: int = DEFAULT_CSP_CAP) -> tuple[dict[str, int], float]:
    """Exhaustive minimum over assignments, with unary hard tables pre-applied.

    Unary tables with infinite entries shrink each vertex's candidate list
    before enumeration, so the guard applies to the number of assignments
    actually visited.  Ties go to the lexicographically smallest
    assignment (vertex order, labels ascending).
    """
    problems = csp_violations(csp)
    if problems:
        raise ValidationError("; ".join(problems))
    fam = csp.family
    nl = fam.num_labels
    verts = csp.vertices
    allowed: dict[str, list[int]] = {}
    for t in csp.tuples:
        if len(t.vertices) != 1:
            continue
        table = fam.unary_table(t.predicate)
        ok = [s for s in range(nl) if not math.isinf(table[s])]
        v = t.vertices[0]
        if v in allowed:
            keep = set(ok)
            allowed[v] = [s for s in allowed[v] if s in keep]
        else:
            allowed[v] = ok
    for v in verts:
        allowed.setdefault(v, list(range(nl)))
        if not allowed[v]:
            raise NoFiniteAssignmentError(f"vertex {v!r} has no finite-cost label")

    bases = [len(allowed[v]) for v in verts]
    total = 1
    for b in bases:
        total *= b
    if total > cap:
        raise SizeGuardError(f"{total} assignments exceed cap {cap}")

    strides = [1] * len(verts)
    for i in range(len(verts) - 2, -1, -1):
        strides[i] = strides[i + 1] * bases[i + 1]
    arrays = {v: np.array(allowed[v], dtype=np.int64) for v in verts}
    binary = [t for t in csp.tuples if len(t.vertices) == 2]

    best_cost = INF
    best_index = None
    chunk = 1 << 18
    for lo in range(0, total, chunk):
        idx = np.arange(lo, min(lo + chunk, total), dtype=np.int64)
        cols = {
            v: arrays[v][(idx // strides[i]) % bases[i]] for i, v in enumerate(verts)
        }
        cost = np.zeros(idx.shape, dtype=float)
        hard = np.zeros(idx.shape, dtype=bool)
        for t in binary:
            cu = cols[t.vertices[0]]
            cv = cols[t.vertices[1]]
            if t.predicate == "C":
                val = (cu & ~cv) != 0
            else:
                val = cu != cv
            if is_infinite(t.weight):
                hard |= val
            else:
                cost += t.weight * val
        cost[hard] = INF
        i = int(np.argmin(cost)) if len(cost) else 0
        if len(cost) and cost[i] < best_cost:
            best_cost = float(cost[i])
            best_index = lo + i
    if best_index is None or math.isinf(best_cost):
        raise NoFiniteAssignmentError("every assignment violates a hard constraint")
    assignment = {
        v: allowed[v][(best_index // strides[i]) % bases[i]] for i, v in enumerate(verts)
    }
    return assignment, best_cost
