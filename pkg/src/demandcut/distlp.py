"""Distance relaxation: compact LP, shortest paths, oracles, and gap reports.

The classical relaxation asks every supply path between a demand pair to
carry total length >= 1 under edge lengths x_e.  We build the compact
potential form instead: per demand source s a potential y_s(v) in [0, 1]
with y_s(s) = 0, y_s(head) <= y_s(tail) + x_e along every edge (both ways
for undirected edges), and y_s(t) >= 1 per demand (s, t).  The two forms
have equal optima because y_s(v) = min(1, d(s, v)) is feasible and any
feasible potential certifies all path constraints.

Infinite-weight edges can never be cut: their x is fixed to zero and they
are excluded from brute-force enumeration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import MulticutInstance, is_infinite, validate_instance
from .errors import (
    InfeasibleStructureError,
    InvalidCutError,
    NoFeasibleCutError,
    SizeGuardError,
    ValidationError,
)
from .lp import FEAS_TOL, INFEASIBLE, OPTIMAL, LinearProgram, LPResult, solve_lp

#: default cap on the number of finite edges in brute-force enumeration
DEFAULT_OPT_CAP = 24

FractionalEdgeSolution = dict[str, float]
DistanceMatrix = dict[tuple[str, str], float]


@dataclass(frozen=True)
class CutSolution:
    edges: frozenset[str]
    cost: float


@dataclass(frozen=True)
class GapReport:
    lp_value: float
    opt_value: float
    opt_cut: CutSolution
    ratio: float


def _require_valid(inst: MulticutInstance) -> None:
    report = validate_instance(inst)
    if not report.ok:
        raise ValidationError("; ".join(report.violations))


def _infinite_reach(inst: MulticutInstance, start: str) -> set[str]:
    """Vertices reachable from start using infinite-weight edges only."""
    adj: dict[str, list[str]] = {v: [] for v in inst.supply.vertices}
    for e in inst.supply.edges:
        if not is_infinite(e.weight):
            continue
        adj[e.tail].append(e.head)
        if not e.directed:
            adj[e.head].append(e.tail)
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def build_distance_lp(inst: MulticutInstance) -> LinearProgram:
    """Compact potential formulation of the path-length relaxation."""
    _require_valid(inst)
    sources = []
    for s, _ in inst.demand.edges:
        if s not in sources:
            sources.append(s)
    for s in sources:
        reach = _infinite_reach(inst, s)
        for s2, t in inst.demand.edges:
            if s2 == s and t in reach:
                raise InfeasibleStructureError(
                    f"demand ({s!r}, {t!r}) is connected by infinite-weight edges alone"
                )

    lp = LinearProgram()
    for e in inst.supply.edges:
        if is_infinite(e.weight):
            lp.add_variable(f"x({e.id})", 0.0, 0.0)
        else:
            lp.add_variable(f"x({e.id})", 0.0, 1.0, objective=e.weight)
    for s in sources:
        for v in inst.supply.vertices:
            upper = 0.0 if v == s else 1.0
            lp.add_variable(f"y({s}.{v})", 0.0, upper)
    for s in sources:
        for e in inst.supply.edges:
            lp.add_constraint(
                {f"y({s}.{e.head})": 1.0, f"y({s}.{e.tail})": -1.0, f"x({e.id})": -1.0},
                "<=",
                0.0,
            )
            if not e.directed:
                lp.add_constraint(
                    {f"y({s}.{e.tail})": 1.0, f"y({s}.{e.head})": -1.0, f"x({e.id})": -1.0},
                    "<=",
                    0.0,
                )
    for s, t in inst.demand.edges:
        lp.add_constraint({f"y({s}.{t})": 1.0}, ">=", 1.0)
    return lp


def edge_solution_from_result(inst: MulticutInstance, result: LPResult) -> FractionalEdgeSolution:
    """Extract x values per edge, clamping solver dust into [0, 1]."""
    x: FractionalEdgeSolution = {}
    for e in inst.supply.edges:
        if is_infinite(e.weight):
            x[e.id] = 0.0
        else:
            x[e.id] = min(1.0, max(0.0, result.values[f"x({e.id})"]))
    return x


def solve_distance_lp(inst: MulticutInstance) -> tuple[float, FractionalEdgeSolution]:
    lp = build_distance_lp(inst)
    result = solve_lp(lp)
    if result.status != OPTIMAL:
        # the pre-check rules out infinite-only connections, so this is unexpected
        raise InfeasibleStructureError(f"distance LP ended with status {result.status}")
    return result.objective_value, edge_solution_from_result(inst, result)


def solution_cost(inst: MulticutInstance, x: FractionalEdgeSolution) -> float:
    return sum(e.weight * x[e.id] for e in inst.supply.edges if not is_infinite(e.weight))


def shortest_paths(inst: MulticutInstance, x: FractionalEdgeSolution) -> DistanceMatrix:
    """Exact all-pairs shortest paths under lengths x_e; unreachable pairs are +inf.

    Directed edges have length x_e one way; undirected edges both ways.
    Infinite-weight edges default to length zero when absent from x.
    """
    verts = inst.supply.vertices
    idx = {v: i for i, v in enumerate(verts)}
    n = len(verts)
    dist = np.full((n, n), math.inf)
    np.fill_diagonal(dist, 0.0)
    for e in inst.supply.edges:
        if e.id in x:
            length = max(0.0, x[e.id])
        elif is_infinite(e.weight):
            length = 0.0
        else:
            raise ValidationError(f"missing x value for finite edge {e.id!r}")
        i, j = idx[e.tail], idx[e.head]
        dist[i, j] = min(dist[i, j], length)
        if not e.directed:
            dist[j, i] = min(dist[j, i], length)
    for k in range(n):
        dist = np.minimum(dist, np.add.outer(dist[:, k], dist[k, :]))
    return {(u, v): float(dist[idx[u], idx[v]]) for u in verts for v in verts}


def verify_cut(inst: MulticutInstance, cut) -> bool:
    """True iff removing the cut edges separates every demand pair."""
    ids = cut.edges if isinstance(cut, CutSolution) else frozenset(cut)
    edge_map = inst.supply.edge_map
    for eid in ids:
        if eid not in edge_map:
            raise InvalidCutError(f"unknown edge id {eid!r}")
        if is_infinite(edge_map[eid].weight):
            raise InvalidCutError(f"cut contains infinite-weight edge {eid!r}")
    adj: dict[str, list[str]] = {v: [] for v in inst.supply.vertices}
    for e in inst.supply.edges:
        if e.id in ids:
            continue
        adj[e.tail].append(e.head)
        if not e.directed:
            adj[e.head].append(e.tail)
    for s, t in inst.demand.edges:
        seen = {s}
        stack = [s]
        hit = False
        while stack and not hit:
            u = stack.pop()
            for v in adj[u]:
                if v == t:
                    hit = True
                    break
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        if hit:
            return False
    return True


def brute_force_opt(inst: MulticutInstance, cap: int = DEFAULT_OPT_CAP) -> CutSolution:
    """Minimum-weight feasible cut by exhaustive subset enumeration.

    Ties are broken toward the lexicographically smallest edge-id set.
    """
    _require_valid(inst)
    finite = sorted(inst.supply.finite_edges, key=lambda e: e.id)
    m = len(finite)
    if m > cap:
        raise SizeGuardError(f"{m} finite edges exceed brute-force cap {cap}")
    if not verify_cut(inst, frozenset(e.id for e in finite)):
        raise NoFeasibleCutError("cutting all finite edges fails to separate the demands")

    weights = [e.weight for e in finite]
    costs = [0.0] * (1 << m)
    for mask in range(1, 1 << m):
        low = (mask & -mask).bit_length() - 1
        costs[mask] = costs[mask & (mask - 1)] + weights[low]

    order = sorted(range(1 << m), key=lambda mask: costs[mask])
    best_mask = None
    for mask in order:
        ids = frozenset(finite[i].id for i in range(m) if mask >> i & 1)
        if verify_cut(inst, ids):
            best_mask = mask
            break
    assert best_mask is not None  # full mask is feasible
    best_cost = costs[best_mask]
    candidates = [
        mask for mask in range(1 << m) if costs[mask] == best_cost
    ]
    best_ids = None
    for mask in candidates:
        ids = tuple(sorted(finite[i].id for i in range(m) if mask >> i & 1))
        if (best_ids is None or ids < best_ids) and verify_cut(inst, frozenset(ids)):
            best_ids = ids
    return CutSolution(frozenset(best_ids), best_cost)


def flow_cut_gap(inst: MulticutInstance, cap: int = DEFAULT_OPT_CAP) -> GapReport:
    """LP optimum vs. brute-force integral optimum with the certificate cut."""
    lp_value, _ = solve_distance_lp(inst)
    opt = brute_force_opt(inst, cap=cap)
    if abs(lp_value) <= FEAS_TOL and abs(opt.cost) <= FEAS_TOL:
        ratio = 1.0
    else:
        ratio = opt.cost / lp_value
    return GapReport(lp_value, opt.cost, opt, ratio)
