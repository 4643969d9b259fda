"""Ball rounding of fractional distance solutions for directed multicut.

Given a feasible x, every vertex u with outgoing demands defines a radius
function over vertices: ball_dist(u, v) is the largest extra edge length
that could be added from u to v without bringing any of u's demand targets
within distance 1 (zero rows for vertices without outgoing demands).  A
single threshold theta cuts, for every u, the edges leaving the ball
{v : ball_dist(u, v) <= theta}; every demand target sits outside its
source's ball, so each threshold yields a feasible cut.

Instead of drawing theta at random we evaluate every breakpoint of the
(piecewise-constant) cut map -- the distinct radius values below 1 -- and
keep the cheapest outcome.  The per-edge theta-measure is computed exactly
from the breakpoint intervals, and a seeded random-theta sampler is kept
for Monte-Carlo estimates of the expected cost.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .core import MatchingExtensionWitness, MulticutInstance, is_infinite
from .distlp import (
    CutSolution,
    DistanceMatrix,
    FractionalEdgeSolution,
    shortest_paths,
)
from .errors import InfiniteEdgeCutError, ParameterError

BallDistances = dict[tuple[str, str], float]


@dataclass(frozen=True)
class RoundingOutcome:
    theta: float
    cut: CutSolution
    per_edge_profile: dict[str, float]


def _demand_targets(inst: MulticutInstance) -> dict[str, list[str]]:
    targets: dict[str, list[str]] = {}
    for s, t in inst.demand.edges:
        targets.setdefault(s, []).append(t)
    return targets


def compute_ball_distance(inst: MulticutInstance, d: DistanceMatrix) -> BallDistances:
    """ball_dist(u, v) = max(0, 1 - min distance from v to any demand target of u)."""
    targets = _demand_targets(inst)
    out: BallDistances = {}
    for u in inst.supply.vertices:
        tl = targets.get(u)
        for v in inst.supply.vertices:
            if not tl:
                out[(u, v)] = 0.0
            else:
                nearest = min(d[(v, t)] for t in tl)
                out[(u, v)] = max(0.0, 1.0 - nearest)
    return out


def ball_cut(inst: MulticutInstance, ball_dist: BallDistances, theta: float) -> CutSolution:
    """Union over u of the edges leaving {v : ball_dist(u, v) <= theta}.

    Undirected edges leave a ball when exactly one endpoint is inside.
    Crossing an infinite-weight edge signals an infeasible x and raises.
    """
    if not (0.0 <= theta < 1.0):
        raise ParameterError(f"theta must lie in [0, 1), got {theta}")
    cut_ids: set[str] = set()
    for u in inst.supply.vertices:
        for e in inst.supply.edges:
            tail_in = ball_dist[(u, e.tail)] <= theta
            head_in = ball_dist[(u, e.head)] <= theta
            crossing = (tail_in and not head_in) if e.directed else (tail_in != head_in)
            if crossing:
                if is_infinite(e.weight):
                    raise InfiniteEdgeCutError(
                        f"infinite-weight edge {e.id!r} leaves a ball at theta={theta}"
                    )
                cut_ids.add(e.id)
    edge_map = inst.supply.edge_map
    cost = sum(edge_map[i].weight for i in cut_ids)
    return CutSolution(frozenset(cut_ids), cost)


def _edge_intervals(inst: MulticutInstance, ball_dist: BallDistances, edge_id: str):
    e = inst.supply.edge_map[edge_id]
    intervals = []
    for u in inst.supply.vertices:
        a = ball_dist[(u, e.tail)]
        b = ball_dist[(u, e.head)]
        lo, hi = (a, b) if e.directed else (min(a, b), max(a, b))
        hi = min(hi, 1.0)
        if hi > lo:
            intervals.append((lo, hi))
    return intervals


def _union_measure(intervals) -> float:
    total = 0.0
    end = -1.0
    for lo, hi in sorted(intervals):
        if lo > end:
            total += hi - lo
            end = hi
        elif hi > end:
            total += hi - end
            end = hi
    return total


def cut_probability_profile(inst: MulticutInstance, x: FractionalEdgeSolution, edge_id: str) -> float:
    """Exact measure of the thetas in (0, 1) at which the edge is cut."""
    d = shortest_paths(inst, x)
    ball_dist = compute_ball_distance(inst, d)
    return _union_measure(_edge_intervals(inst, ball_dist, edge_id))


def derandomized_round(inst: MulticutInstance, x: FractionalEdgeSolution) -> RoundingOutcome:
    """Evaluate every realizable threshold cut and return the cheapest.

    Candidate thetas are the distinct ball-distance values in [0, 1): ball
    membership is a right-continuous step function of theta, so these
    breakpoints cover every cut the random threshold could produce.  Ties
    are broken by (cost, theta).
    """
    d = shortest_paths(inst, x)
    ball_dist = compute_ball_distance(inst, d)
    candidates = sorted({0.0} | {v for v in ball_dist.values() if 0.0 <= v < 1.0})
    best: tuple[float, float, CutSolution] | None = None
    for theta in candidates:
        cut = ball_cut(inst, ball_dist, theta)
        key = (cut.cost, theta)
        if best is None or key < (best[0], best[1]):
            best = (cut.cost, theta, cut)
    assert best is not None
    profile = {
        e.id: _union_measure(_edge_intervals(inst, ball_dist, e.id))
        for e in inst.supply.edges
    }
    return RoundingOutcome(theta=best[1], cut=best[2], per_edge_profile=profile)


def monte_carlo_round(inst: MulticutInstance, x: FractionalEdgeSolution, trials: int, seed: int) -> list[CutSolution]:
    """Seeded random-theta mode for estimating the expected cut cost."""
    d = shortest_paths(inst, x)
    ball_dist = compute_ball_distance(inst, d)
    rng = random.Random(seed)
    out = []
    for _ in range(trials):
        theta = rng.random()
        out.append(ball_cut(inst, ball_dist, theta))
    return out


def extract_matching_extension(inst: MulticutInstance, x: FractionalEdgeSolution, k: int):
    """Witness extraction from a shared vertex with k distinct nonzero radii.

    If some vertex v sees k sources at pairwise-distinct nonzero ball
    distances, sorting those sources by decreasing radius and pairing each
    with its nearest demand target yields a k-row matching-extension
    witness.  Returns None when no vertex qualifies.
    """
    if k < 1:
        raise ParameterError(f"extension size must be >= 1, got {k}")
    d = shortest_paths(inst, x)
    ball_dist = compute_ball_distance(inst, d)
    targets = _demand_targets(inst)
    sources = sorted(targets)
    for v in sorted(inst.supply.vertices):
        by_value: dict[float, str] = {}
        for u in sources:
            val = ball_dist[(u, v)]
            if val > 0.0 and val not in by_value:
                by_value[val] = u
        if len(by_value) < k:
            continue
        chosen = sorted(by_value.items(), key=lambda item: -item[0])[:k]
        s_list = []
        t_list = []
        for _, u in chosen:
            s_list.append(u)
            partner = min(targets[u], key=lambda t: (d[(v, t)], t))
            t_list.append(partner)
        witness = MatchingExtensionWitness(tuple(s_list), tuple(t_list))
        if witness.check(inst.demand):
            return witness
    return None
