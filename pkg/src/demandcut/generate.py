"""Seeded random instance generation for experiments and the CLI."""

from __future__ import annotations

import random

from .core import MulticutInstance, make_instance
from .errors import ParameterError

DEMAND_SHAPES = (
    "random",
    "triangle-cast",
    "complete",
    "disjoint-matching",
    "matching-removed-complete",
)

DIRECTEDNESS = ("directed", "undirected", "mixed")


def _demand_edges(shape: str, k: int, rng: random.Random, terminals: list[str]):
    """Demand pattern over the placed terminals.

    For the two-sided shapes (triangle-cast, disjoint-matching, random) the
    terminal pool is split into k sources and k sinks; for the complete
    shapes the pattern lives on the first k terminals.
    """
    if shape == "triangle-cast":
        src, snk = terminals[:k], terminals[k:2 * k]
        return [(src[i], snk[j]) for i in range(k) for j in range(k) if i <= j]
    if shape == "disjoint-matching":
        src, snk = terminals[:k], terminals[k:2 * k]
        return [(src[i], snk[i]) for i in range(k)]
    if shape == "complete":
        pool = terminals[:k]
        return [(u, v) for u in pool for v in pool if u != v]
    if shape == "matching-removed-complete":
        if k % 2:
            raise ParameterError("matching-removed-complete needs an even node count")
        pool = terminals[:k]
        removed = {(pool[2 * i], pool[2 * i + 1]) for i in range(k // 2)}
        removed |= {(b, a) for a, b in removed}
        return [(u, v) for u in pool for v in pool if u != v and (u, v) not in removed]
    # random: k distinct ordered pairs over the 2k-terminal pool
    pool = terminals[: 2 * k]
    pairs = [(u, v) for u in pool for v in pool if u != v]
    return sorted(rng.sample(pairs, k))


def gen_instance(
    seed: int,
    n: int,
    k: int,
    edge_density: float = 0.4,
    directedness: str = "directed",
    demand_shape: str = "random",
) -> MulticutInstance:
    """Deterministic random instance; the demand shape is produced exactly.

    Integer weights in [1, 10] keep brute-force comparisons exact.  The
    declared terminal order is first appearance in the demand list, so
    serialization round-trips byte-stably.
    """
    if demand_shape not in DEMAND_SHAPES:
        raise ParameterError(f"unknown demand shape {demand_shape!r}")
    if directedness not in DIRECTEDNESS:
        raise ParameterError(f"unknown directedness {directedness!r}")
    if k < 1:
        raise ParameterError("k must be >= 1")
    if n < 2 * k:
        raise ParameterError(f"need n >= 2k to place terminals, got n={n}, k={k}")
    if not (0.0 <= edge_density <= 1.0):
        raise ParameterError("edge density must lie in [0, 1]")

    rng = random.Random(seed)
    vertices = [f"v{i}" for i in range(n)]
    terminal_pool = rng.sample(vertices, 2 * k)
    demands = _demand_edges(demand_shape, k, rng, terminal_pool)

    directed = []
    undirected = []
    nd = nu = 0
    for a_idx in range(n):
        for b_idx in range(a_idx + 1, n):
            u, v = vertices[a_idx], vertices[b_idx]
            if directedness == "directed":
                for tail, head in ((u, v), (v, u)):
                    if rng.random() < edge_density:
                        directed.append((f"d{nd}", tail, head, rng.randint(1, 10)))
                        nd += 1
            elif directedness == "undirected":
                if rng.random() < edge_density:
                    undirected.append((f"u{nu}", u, v, rng.randint(1, 10)))
                    nu += 1
            else:
                if rng.random() < edge_density:
                    if rng.random() < 0.5:
                        undirected.append((f"u{nu}", u, v, rng.randint(1, 10)))
                        nu += 1
                    else:
                        tail, head = (u, v) if rng.random() < 0.5 else (v, u)
                        directed.append((f"d{nd}", tail, head, rng.randint(1, 10)))
                        nd += 1
    return make_instance(vertices, directed=directed, undirected=undirected, demands=demands)
