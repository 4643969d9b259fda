"""Reachability-label relaxation over {0,1}^k and its exchange with the distance form.

Each vertex carries a distribution over k-bit labels (bit i = "reachable
from terminal i"), each edge a joint distribution consistent with its
endpoint marginals, and the edge charge x_e is the joint mass on pairs
with label(tail) not <= label(head) for directed edges, and on unequal
pairs for undirected edges.  Both directions of the exchange with the
distance relaxation are constructive:

* distance -> label: per vertex, sort terminals by (clamped) distance and
  spread mass along the resulting chain of nested labels; per edge, ship
  mass between the endpoint chains at minimum charge.
* label -> distance: reuse the x values; any feasible label solution makes
  every demand pair lie at distance >= 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import MulticutInstance, is_infinite, validate_instance
from .errors import (
    InfeasibleInputError,
    MarginalMismatchError,
    ParameterError,
    SizeGuardError,
    ValidationError,
)
from .labels import label_bit, label_leq, label_str
from .distlp import FractionalEdgeSolution, shortest_paths
from .lp import OPTIMAL, LinearProgram, LPResult, solve_lp

#: default bound on the number of terminals (variable count grows as |E| * 4^k)
DEFAULT_LABEL_CAP = 4

_MASS_EPS = 1e-15

Distribution = dict[int, float]
Joint = dict[tuple[int, int], float]


@dataclass
class LabelSolution:
    terminals: tuple[str, ...]
    vertex_dist: dict[str, Distribution]
    edge_joint: dict[str, Joint]
    x: FractionalEdgeSolution

    @property
    def num_terminals(self) -> int:
        return len(self.terminals)


def _require_valid(inst: MulticutInstance) -> None:
    report = validate_instance(inst)
    if not report.ok:
        raise ValidationError("; ".join(report.violations))


def build_label_lp(inst: MulticutInstance, label_cap: int = DEFAULT_LABEL_CAP) -> LinearProgram:
    """LP over per-vertex label distributions and per-edge joint distributions.

    Constraint families: unit mass per vertex; terminals see themselves;
    demand targets never see their demand source; joint marginals match
    endpoint distributions; x_e aggregates the charged pairs (order
    violations on directed edges, inequality on undirected edges).
    Infinite-weight edges get x_e fixed to zero.
    """
    _require_valid(inst)
    terms = inst.demand.terminals
    k = len(terms)
    if k > label_cap:
        raise SizeGuardError(f"{k} terminals exceed label cap {label_cap}")
    labels = range(1 << k)
    term_index = {t: i for i, t in enumerate(terms)}

    forbidden: dict[str, set[int]] = {t: set() for t in terms}
    for t in terms:
        i = term_index[t]
        for lab in labels:
            if not label_bit(lab, i, k):
                forbidden[t].add(lab)
    for s, t in inst.demand.edges:
        i = term_index[s]
        for lab in labels:
            if label_bit(lab, i, k):
                forbidden[t].add(lab)

    lp = LinearProgram()
    for v in inst.supply.vertices:
        banned = forbidden.get(v, ())
        for lab in labels:
            upper = 0.0 if lab in banned else 1.0
            lp.add_variable(f"z({v}.{label_str(lab, k)})", 0.0, upper)
    for e in inst.supply.edges:
        for l1 in labels:
            for l2 in labels:
                lp.add_variable(f"j({e.id}.{label_str(l1, k)}.{label_str(l2, k)})", 0.0, 1.0)
        if is_infinite(e.weight):
            lp.add_variable(f"x({e.id})", 0.0, 0.0)
        else:
            lp.add_variable(f"x({e.id})", 0.0, 1.0, objective=e.weight)

    for v in inst.supply.vertices:
        lp.add_constraint(
            {f"z({v}.{label_str(lab, k)})": 1.0 for lab in labels}, "=", 1.0
        )
    for e in inst.supply.edges:
        for l1 in labels:
            coeffs = {f"j({e.id}.{label_str(l1, k)}.{label_str(l2, k)})": 1.0 for l2 in labels}
            coeffs[f"z({e.tail}.{label_str(l1, k)})"] = -1.0
            lp.add_constraint(coeffs, "=", 0.0)
        for l2 in labels:
            coeffs = {f"j({e.id}.{label_str(l1, k)}.{label_str(l2, k)})": 1.0 for l1 in labels}
            coeffs[f"z({e.head}.{label_str(l2, k)})"] = -1.0
            lp.add_constraint(coeffs, "=", 0.0)
        if e.directed:
            charged = [(l1, l2) for l1 in labels for l2 in labels if not label_leq(l1, l2)]
        else:
            charged = [(l1, l2) for l1 in labels for l2 in labels if l1 != l2]
        coeffs = {f"j({e.id}.{label_str(l1, k)}.{label_str(l2, k)})": 1.0 for l1, l2 in charged}
        coeffs[f"x({e.id})"] = -1.0
        lp.add_constraint(coeffs, "=", 0.0)
    return lp


def label_solution_from_result(inst: MulticutInstance, result: LPResult) -> LabelSolution:
    k = len(inst.demand.terminals)
    labels = range(1 << k)
    vertex_dist: dict[str, Distribution] = {}
    for v in inst.supply.vertices:
        dist = {}
        for lab in labels:
            mass = result.values[f"z({v}.{label_str(lab, k)})"]
            if mass > _MASS_EPS:
                dist[lab] = mass
        vertex_dist[v] = dist
    edge_joint: dict[str, Joint] = {}
    x: FractionalEdgeSolution = {}
    for e in inst.supply.edges:
        joint = {}
        for l1 in labels:
            for l2 in labels:
                mass = result.values[f"j({e.id}.{label_str(l1, k)}.{label_str(l2, k)})"]
                if mass > _MASS_EPS:
                    joint[(l1, l2)] = mass
        edge_joint[e.id] = joint
        x[e.id] = min(1.0, max(0.0, result.values[f"x({e.id})"]))
    return LabelSolution(inst.demand.terminals, vertex_dist, edge_joint, x)


def label_cost(inst: MulticutInstance, sol: LabelSolution) -> float:
    return sum(
        e.weight * sol.x[e.id] for e in inst.supply.edges if not is_infinite(e.weight)
    )


def check_label_solution(inst: MulticutInstance, sol: LabelSolution, tol: float = 1e-8) -> list[str]:
    """All constraint families of the label relaxation, checked directly."""
    out: list[str] = []
    terms = inst.demand.terminals
    k = len(terms)
    term_index = {t: i for i, t in enumerate(terms)}
    for v in inst.supply.vertices:
        dist = sol.vertex_dist.get(v)
        if dist is None:
            out.append(f"vertex {v!r}: missing distribution")
            continue
        total = sum(dist.values())
        if abs(total - 1.0) > tol:
            out.append(f"vertex {v!r}: mass {total} != 1")
        if any(m < -tol for m in dist.values()):
            out.append(f"vertex {v!r}: negative mass")
    for t in terms:
        i = term_index[t]
        for lab, mass in sol.vertex_dist.get(t, {}).items():
            if not label_bit(lab, i, k) and mass > tol:
                out.append(f"terminal {t!r}: mass {mass} on label without its own bit")
    for s, t in inst.demand.edges:
        i = term_index[s]
        for lab, mass in sol.vertex_dist.get(t, {}).items():
            if label_bit(lab, i, k) and mass > tol:
                out.append(f"demand ({s!r},{t!r}): target carries source bit, mass {mass}")
    for e in inst.supply.edges:
        joint = sol.edge_joint.get(e.id)
        if joint is None:
            out.append(f"edge {e.id!r}: missing joint")
            continue
        if any(m < -tol for m in joint.values()):
            out.append(f"edge {e.id!r}: negative joint mass")
        tail_marg: Distribution = {}
        head_marg: Distribution = {}
        for (l1, l2), mass in joint.items():
            tail_marg[l1] = tail_marg.get(l1, 0.0) + mass
            head_marg[l2] = head_marg.get(l2, 0.0) + mass
        tail_dist = sol.vertex_dist.get(e.tail, {})
        head_dist = sol.vertex_dist.get(e.head, {})
        for lab in set(tail_marg) | set(tail_dist):
            if abs(tail_marg.get(lab, 0.0) - tail_dist.get(lab, 0.0)) > tol:
                out.append(f"edge {e.id!r}: tail marginal off at {label_str(lab, k)}")
                break
        for lab in set(head_marg) | set(head_dist):
            if abs(head_marg.get(lab, 0.0) - head_dist.get(lab, 0.0)) > tol:
                out.append(f"edge {e.id!r}: head marginal off at {label_str(lab, k)}")
                break
        if e.directed:
            charge = sum(m for (l1, l2), m in joint.items() if not label_leq(l1, l2))
        else:
            charge = sum(m for (l1, l2), m in joint.items() if l1 != l2)
        if abs(charge - sol.x.get(e.id, 0.0)) > tol:
            out.append(f"edge {e.id!r}: x={sol.x.get(e.id)} but charged mass is {charge}")
        if is_infinite(e.weight) and charge > tol:
            out.append(f"edge {e.id!r}: infinite edge carries charged mass {charge}")
    return out


def _is_chain(support: list[int]) -> bool:
    ordered = sorted(support, key=lambda lab: (bin(lab).count("1"), lab))
    return all(label_leq(a, b) for a, b in zip(ordered, ordered[1:]))


def transport_labels(zu: Distribution, zv: Distribution, mode: str) -> tuple[Joint, float]:
    """Ship mass from one label distribution to another at minimum charge.

    Charged pairs are order violations (directed) or unequal pairs
    (undirected).  Chain-supported inputs use the greedy shipment: walk the
    source chain upward and serve the smallest compatible target first,
    then pair the leftovers.  General inputs fall back to a small
    transportation LP.
    """
    if mode not in ("directed", "undirected"):
        raise ParameterError(f"unknown transport mode {mode!r}")
    if abs(sum(zu.values()) - 1.0) > 1e-9 or abs(sum(zv.values()) - 1.0) > 1e-9:
        raise MarginalMismatchError("endpoint distributions must sum to 1")

    supp_u = sorted(lab for lab, m in zu.items() if m > _MASS_EPS)
    supp_v = sorted(lab for lab, m in zv.items() if m > _MASS_EPS)

    if mode == "undirected":
        return _transport_equal(zu, zv, supp_u, supp_v)
    if _is_chain(supp_u) and _is_chain(supp_v):
        return _transport_chain(zu, zv, supp_u, supp_v)
    return _transport_lp(zu, zv, supp_u, supp_v)


def _leftover_pairing(joint: Joint, res_u: dict[int, float], res_v: dict[int, float]) -> float:
    """Pair remaining supply with remaining demand (all charged); returns the mass."""
    total = 0.0
    left_u = [(lab, m) for lab, m in sorted(res_u.items()) if m > _MASS_EPS]
    left_v = [(lab, m) for lab, m in sorted(res_v.items()) if m > _MASS_EPS]
    i = j = 0
    while i < len(left_u) and j < len(left_v):
        lu, mu = left_u[i]
        lv, mv = left_v[j]
        m = min(mu, mv)
        joint[(lu, lv)] = joint.get((lu, lv), 0.0) + m
        total += m
        left_u[i] = (lu, mu - m)
        left_v[j] = (lv, mv - m)
        if left_u[i][1] <= _MASS_EPS:
            i += 1
        if left_v[j][1] <= _MASS_EPS:
            j += 1
    return total


def _transport_equal(zu, zv, supp_u, supp_v) -> tuple[Joint, float]:
    joint: Joint = {}
    res_u = {lab: zu[lab] for lab in supp_u}
    res_v = {lab: zv[lab] for lab in supp_v}
    for lab in supp_u:
        if lab in res_v:
            m = min(res_u[lab], res_v[lab])
            if m > _MASS_EPS:
                joint[(lab, lab)] = m
                res_u[lab] -= m
                res_v[lab] -= m
    cost = _leftover_pairing(joint, res_u, res_v)
    return joint, cost


def _transport_chain(zu, zv, supp_u, supp_v) -> tuple[Joint, float]:
    chain_u = sorted(supp_u, key=lambda lab: (bin(lab).count("1"), lab))
    chain_v = sorted(supp_v, key=lambda lab: (bin(lab).count("1"), lab))
    joint: Joint = {}
    res_u = {lab: zu[lab] for lab in chain_u}
    res_v = {lab: zv[lab] for lab in chain_v}
    for lu in chain_u:
        for lv in chain_v:
            if res_u[lu] <= _MASS_EPS:
                break
            if res_v[lv] <= _MASS_EPS or not label_leq(lu, lv):
                continue
            m = min(res_u[lu], res_v[lv])
            joint[(lu, lv)] = joint.get((lu, lv), 0.0) + m
            res_u[lu] -= m
            res_v[lv] -= m
    cost = _leftover_pairing(joint, res_u, res_v)
    return joint, cost


def _transport_lp(zu, zv, supp_u, supp_v) -> tuple[Joint, float]:
    lp = LinearProgram()
    for lu in supp_u:
        for lv in supp_v:
            cost = 0.0 if label_leq(lu, lv) else 1.0
            lp.add_variable(f"f({lu}.{lv})", 0.0, 1.0, objective=cost)
    for lu in supp_u:
        lp.add_constraint({f"f({lu}.{lv})": 1.0 for lv in supp_v}, "=", zu[lu])
    for lv in supp_v:
        lp.add_constraint({f"f({lu}.{lv})": 1.0 for lu in supp_u}, "=", zv[lv])
    res = solve_lp(lp)
    if res.status != OPTIMAL:
        raise MarginalMismatchError("transport LP infeasible")
    joint = {
        (lu, lv): res.values[f"f({lu}.{lv})"]
        for lu in supp_u
        for lv in supp_v
        if res.values[f"f({lu}.{lv})"] > _MASS_EPS
    }
    return joint, res.objective_value


def distlp_to_label(inst: MulticutInstance, x: FractionalEdgeSolution, tol: float = 1e-6) -> LabelSolution:
    """Chain construction: distance-sorted nested labels per vertex, then edge transports.

    Distances are clamped at 1 (the zero-cost dummy-edge convention), which
    keeps the per-edge charge within max_i(d(s_i, head) - d(s_i, tail)).
    """
    _require_valid(inst)
    terms = inst.demand.terminals
    k = len(terms)
    d = shortest_paths(inst, x)
    for s, t in inst.demand.edges:
        if d[(s, t)] < 1.0 - tol:
            raise InfeasibleInputError(f"demand ({s!r},{t!r}) at distance {d[(s, t)]} < 1")

    vertex_dist: dict[str, Distribution] = {}
    for u in inst.supply.vertices:
        clamped = [min(1.0, d[(terms[i], u)]) for i in range(k)]
        order = sorted(range(k), key=lambda i: (clamped[i], i))
        dist: Distribution = {}
        label = 0
        prev = 0.0
        for i in order:
            mass = clamped[i] - prev
            if mass > _MASS_EPS:
                dist[label] = dist.get(label, 0.0) + mass
            label |= 1 << (k - 1 - i)
            prev = clamped[i]
        top = 1.0 - prev
        if top > _MASS_EPS or not dist:
            dist[label] = dist.get(label, 0.0) + max(top, 0.0)
        total = sum(dist.values())
        if total > 0:
            dist = {lab: m / total for lab, m in dist.items()}
        vertex_dist[u] = dist

    edge_joint: dict[str, Joint] = {}
    x_out: FractionalEdgeSolution = {}
    for e in inst.supply.edges:
        mode = "directed" if e.directed else "undirected"
        joint, cost = transport_labels(vertex_dist[e.tail], vertex_dist[e.head], mode)
        edge_joint[e.id] = joint
        x_out[e.id] = 0.0 if cost < 1e-12 else min(1.0, cost)
    return LabelSolution(terms, vertex_dist, edge_joint, x_out)


def label_to_distlp(inst: MulticutInstance, sol: LabelSolution, tol: float = 1e-6) -> FractionalEdgeSolution:
    """Reuse the label solution's x values; verify they stretch every demand to >= 1."""
    x = dict(sol.x)
    for e in inst.supply.edges:
        if e.id not in x:
            raise InfeasibleInputError(f"solution has no x value for edge {e.id!r}")
        if x[e.id] < -tol or x[e.id] > 1.0 + tol:
            raise InfeasibleInputError(f"x[{e.id!r}] = {x[e.id]} out of bounds")
    d = shortest_paths(inst, x)
    for s, t in inst.demand.edges:
        if d[(s, t)] < 1.0 - tol:
            raise InfeasibleInputError(
                f"x gives demand ({s!r},{t!r}) distance {d[(s, t)]} < 1"
            )
    return x
