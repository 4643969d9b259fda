"""Undirected multicut via uniform metric labeling.

When the (undirected view of the) demand graph has no induced matching of
size t, its maximal independent sets are few, and the cut problem reduces
to uniform metric labeling: one label per maximal independent set, zero
assignment cost exactly where a terminal belongs to the set, free labels
for non-terminals.  Cuts correspond to label boundaries of equal cost.
The labeling is solved with the standard relaxation (per-vertex label
distributions, per-edge separation at least half the L1 distance) and
rounded by repeated threshold phases; the best of a fixed number of
seeded trials is returned.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .core import (
    DemandGraph,
    MulticutInstance,
    SupplyGraph,
    find_induced_matching,
    is_infinite,
)
from .distlp import CutSolution
from .errors import (
    DirectedInputError,
    InfeasibleInputError,
    NotTK2FreeError,
    SizeGuardError,
)
from .lp import INFEASIBLE, OPTIMAL, LinearProgram, solve_lp

#: default cap on the number of maximal independent sets
DEFAULT_MIS_CAP = 100_000

_SNAP_EPS = 1e-12


@dataclass(frozen=True)
class UMLInstance:
    graph: SupplyGraph  # undirected edges only
    labels: tuple[int, ...]
    label_sets: tuple[frozenset[str], ...]
    assignment_cost: dict[tuple[str, int], float]

    def cost_of(self, vertex: str, label: int) -> float:
        return self.assignment_cost.get((vertex, label), 0.0)


@dataclass
class FractionalLabeling:
    vertex_dist: dict[str, dict[int, float]]
    separation: dict[str, float]
    value: float


@dataclass(frozen=True)
class IntegralLabeling:
    assignment: dict[str, int]


def enumerate_mis(H: DemandGraph, cap: int = DEFAULT_MIS_CAP) -> list[frozenset[str]]:
    """All maximal independent sets of the demand graph, orientation ignored.

    Recursive include/exclude branching on a highest-degree vertex with a
    maximality filter at the leaves; duplicates are removed by canonical
    representation.  Raises SizeGuardError beyond `cap` sets.
    """
    verts = tuple(H.terminals)
    adj: dict[str, set[str]] = {v: set() for v in verts}
    for u, v in H.edges:
        if u != v:
            adj[u].add(v)
            adj[v].add(u)
    results: set[frozenset[str]] = set()

    def is_maximal(chosen: frozenset[str]) -> bool:
        return all(v in chosen or (adj[v] & chosen) for v in verts)

    def rec(chosen: frozenset[str], remaining: frozenset[str]) -> None:
        if not remaining:
            if is_maximal(chosen):
                results.add(chosen)
                if len(results) > cap:
                    raise SizeGuardError(f"more than {cap} maximal independent sets")
            return
        v = max(remaining, key=lambda w: (len(adj[w] & remaining), w))
        rec(chosen | {v}, remaining - {v} - adj[v])
        rec(chosen, remaining - {v})

    rec(frozenset(), frozenset(verts))
    return sorted(results, key=sorted)


def reduce_to_uml(inst: MulticutInstance, mis: list[frozenset[str]]) -> UMLInstance:
    """One label per maximal independent set; terminals pay 0 only inside their sets."""
    if inst.supply.directed_edges:
        raise DirectedInputError("labeling reduction requires an undirected supply graph")
    labels = tuple(range(1, len(mis) + 1))
    cost: dict[tuple[str, int], float] = {}
    for t in inst.demand.terminals:
        for lab, s in zip(labels, mis):
            if t not in s:
                cost[(t, lab)] = math.inf
    return UMLInstance(inst.supply, labels, tuple(frozenset(s) for s in mis), cost)


def solve_uml_lp(uml: UMLInstance) -> FractionalLabeling:
    """Relaxation with per-vertex label distributions and L1/2 edge separation.

    Infinite assignment costs become variables fixed at zero; infinite
    edge weights force equal endpoint distributions instead of entering
    the objective.
    """
    lp = LinearProgram()
    verts = uml.graph.vertices
    for v in verts:
        for lab in uml.labels:
            upper = 0.0 if math.isinf(uml.cost_of(v, lab)) else 1.0
            lp.add_variable(f"a({v}.{lab})", 0.0, upper)
        lp.add_constraint({f"a({v}.{lab})": 1.0 for lab in uml.labels}, "=", 1.0)
    for e in uml.graph.undirected_edges:
        inf_edge = is_infinite(e.weight)
        for lab in uml.labels:
            upper = 0.0 if inf_edge else math.inf
            obj = 0.0 if inf_edge else e.weight / 2.0
            lp.add_variable(f"s({e.id}.{lab})", 0.0, upper, objective=obj)
            lp.add_constraint(
                {f"s({e.id}.{lab})": 1.0, f"a({e.tail}.{lab})": -1.0, f"a({e.head}.{lab})": 1.0},
                ">=",
                0.0,
            )
            lp.add_constraint(
                {f"s({e.id}.{lab})": 1.0, f"a({e.head}.{lab})": -1.0, f"a({e.tail}.{lab})": 1.0},
                ">=",
                0.0,
            )
    res = solve_lp(lp)
    if res.status == INFEASIBLE:
        raise InfeasibleInputError("no finite-cost labeling exists (a terminal has no zero-cost label)")
    if res.status != OPTIMAL:
        raise InfeasibleInputError(f"labeling relaxation ended with status {res.status}")

    vertex_dist: dict[str, dict[int, float]] = {}
    for v in verts:
        raw = {lab: max(0.0, res.values[f"a({v}.{lab})"]) for lab in uml.labels}
        raw = {lab: (0.0 if m < _SNAP_EPS else m) for lab, m in raw.items()}
        total = sum(raw.values())
        vertex_dist[v] = {lab: m / total for lab, m in raw.items() if m > 0.0}
    separation: dict[str, float] = {}
    for e in uml.graph.undirected_edges:
        du = vertex_dist[e.tail]
        dv = vertex_dist[e.head]
        separation[e.id] = 0.5 * sum(
            abs(du.get(lab, 0.0) - dv.get(lab, 0.0)) for lab in uml.labels
        )
    return FractionalLabeling(vertex_dist, separation, res.objective_value)


def labeling_cost(uml: UMLInstance, assignment: dict[str, int]) -> float:
    cost = sum(uml.cost_of(v, lab) for v, lab in assignment.items())
    for e in uml.graph.undirected_edges:
        if assignment[e.tail] != assignment[e.head]:
            cost += e.weight
    return cost


def round_labeling(uml: UMLInstance, frac: FractionalLabeling, trials: int = 32, seed: int = 0) -> IntegralLabeling:
    """Threshold-phase rounding, best of `trials` seeded repetitions.

    Each phase draws a uniform label and a uniform threshold in (0, 1] and
    assigns the label to every still-unassigned vertex whose fractional
    mass on it reaches the threshold.  Zero-mass labels can never fire, so
    assignment costs stay finite.
    """
    verts = tuple(uml.graph.vertices)
    best: tuple[float, int, dict[str, int]] | None = None
    for trial in range(trials):
        rng = random.Random(seed * 1_000_003 + trial)
        assignment: dict[str, int] = {}
        remaining = set(verts)
        while remaining:
            lab = uml.labels[rng.randrange(len(uml.labels))]
            alpha = 1.0 - rng.random()
            newly = [v for v in remaining if frac.vertex_dist[v].get(lab, 0.0) >= alpha]
            for v in newly:
                assignment[v] = lab
            remaining.difference_update(newly)
        cost = labeling_cost(uml, assignment)
        if best is None or cost < best[0]:
            best = (cost, trial, assignment)
    assert best is not None
    if math.isinf(best[0]):
        raise InfeasibleInputError("all rounding trials produced infinite-cost labelings")
    return IntegralLabeling(best[2])


def cut_from_labeling(uml: UMLInstance, labeling: IntegralLabeling) -> CutSolution:
    ids = frozenset(
        e.id
        for e in uml.graph.undirected_edges
        if labeling.assignment[e.tail] != labeling.assignment[e.head]
    )
    cost = sum(uml.graph.edge_map[i].weight for i in ids)
    return CutSolution(ids, cost)


def solve_tk2(inst: MulticutInstance, t: int, trials: int = 32, seed: int = 0,
              mis_cap: int = DEFAULT_MIS_CAP) -> CutSolution:
    """End-to-end pipeline for undirected instances with small induced matchings.

    Refuses (with the witness) when the demand graph contains an induced
    matching of size t; otherwise enumerates the maximal independent sets,
    solves the labeling relaxation, rounds it, and reads the cut off the
    label boundaries.
    """
    if inst.supply.directed_edges:
        raise DirectedInputError("pipeline requires an undirected supply graph")
    witness = find_induced_matching(inst.demand, t)
    if witness is not None:
        raise NotTK2FreeError(witness)
    mis = enumerate_mis(inst.demand, cap=mis_cap)
    uml = reduce_to_uml(inst, mis)
    frac = solve_uml_lp(uml)
    labeling = round_labeling(uml, frac, trials=trials, seed=seed)
    return cut_from_labeling(uml, labeling)
