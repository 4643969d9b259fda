"""Instance model and demand-graph structure analysis.

A multicut instance is a weighted supply graph (directed and undirected
edges, finite or infinite weights) together with a directed demand graph
listing the ordered pairs that a cut must separate.  This module holds the
instance types, validation, and the purely combinatorial analyses of the
demand graph: source/sink bipartitions with their nesting structure,
induced-matching and matching-extension witness searches, and the
bit-split decomposition of an arbitrary demand graph into bipartite parts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations

from .errors import NotBipartiteError, ParameterError, SizeGuardError

INF = math.inf

#: default cap on enumeration work in the witness searches
DEFAULT_ENUM_CAP = 10_000_000

#: prefix reserved for vertices invented by this package (padding, gadgets)
RESERVED_PREFIX = "__"


def is_infinite(weight: float) -> bool:
    return math.isinf(weight)


@dataclass(frozen=True)
class SupplyEdge:
    """A weighted supply edge; for undirected edges tail/head are just storage order."""

    id: str
    tail: str
    head: str
    weight: float
    directed: bool = True

    @property
    def endpoints(self) -> tuple[str, str]:
        return (self.tail, self.head)


@dataclass(frozen=True)
class SupplyGraph:
    vertices: tuple[str, ...]
    directed_edges: tuple[SupplyEdge, ...] = ()
    undirected_edges: tuple[SupplyEdge, ...] = ()

    @classmethod
    def build(cls, vertices, directed=(), undirected=()) -> "SupplyGraph":
        de = tuple(SupplyEdge(str(i), str(u), str(v), float(w), True) for (i, u, v, w) in directed)
        ue = tuple(SupplyEdge(str(i), str(u), str(v), float(w), False) for (i, u, v, w) in undirected)
        return cls(tuple(str(v) for v in vertices), de, ue)

    @property
    def edges(self) -> tuple[SupplyEdge, ...]:
        return self.directed_edges + self.undirected_edges

    @cached_property
    def edge_map(self) -> dict[str, SupplyEdge]:
        return {e.id: e for e in self.edges}

    @cached_property
    def vertex_set(self) -> frozenset[str]:
        return frozenset(self.vertices)

    @property
    def finite_edges(self) -> tuple[SupplyEdge, ...]:
        return tuple(e for e in self.edges if not is_infinite(e.weight))


@dataclass(frozen=True)
class DemandGraph:
    """Directed demand pairs over a declared, ordered terminal list."""

    terminals: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]

    @classmethod
    def build(cls, edges, terminals=None) -> "DemandGraph":
        edges = tuple((str(s), str(t)) for (s, t) in edges)
        if terminals is None:
            seen: list[str] = []
            for s, t in edges:
                for v in (s, t):
                    if v not in seen:
                        seen.append(v)
            terminals = seen
        return cls(tuple(str(v) for v in terminals), edges)

    @cached_property
    def edge_set(self) -> frozenset[tuple[str, str]]:
        return frozenset(self.edges)

    @cached_property
    def undirected_pairs(self) -> tuple[tuple[str, str], ...]:
        """Distinct demand edges with orientation dropped, sorted."""
        return tuple(sorted({tuple(sorted(e)) for e in self.edges}))


@dataclass(frozen=True)
class MulticutInstance:
    supply: SupplyGraph
    demand: DemandGraph


def make_instance(vertices, directed=(), undirected=(), demands=(), terminals=None) -> MulticutInstance:
    """Convenience constructor used heavily by tests and generators."""
    return MulticutInstance(
        supply=SupplyGraph.build(vertices, directed=directed, undirected=undirected),
        demand=DemandGraph.build(demands, terminals=terminals),
    )


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_instance(inst: MulticutInstance) -> ValidationReport:
    """Collect every structural violation; an empty report means all invariants hold."""
    out: list[str] = []
    sup = inst.supply
    seen_vertices = set()
    for v in sup.vertices:
        if v in seen_vertices:
            out.append(f"duplicate vertex {v!r}")
        seen_vertices.add(v)
    seen_ids = set()
    for e in sup.edges:
        if e.id in seen_ids:
            out.append(f"duplicate edge id {e.id!r}")
        seen_ids.add(e.id)
        for v in e.endpoints:
            if v not in seen_vertices:
                out.append(f"edge {e.id!r}: unknown vertex {v!r}")
        if math.isnan(e.weight) or e.weight < 0:
            out.append(f"edge {e.id!r}: negative weight {e.weight}")
    term_seen = set()
    for t in inst.demand.terminals:
        if t in term_seen:
            out.append(f"duplicate terminal {t!r}")
        term_seen.add(t)
        if t not in seen_vertices:
            out.append(f"terminal {t!r} is not a supply vertex")
    pair_seen = set()
    for s, t in inst.demand.edges:
        if s == t:
            out.append(f"self-loop demand ({s!r}, {t!r})")
        if (s, t) in pair_seen:
            out.append(f"duplicate demand pair ({s!r}, {t!r})")
        pair_seen.add((s, t))
        for v in (s, t):
            if v not in term_seen:
                out.append(f"demand endpoint {v!r} is not a declared terminal")
    return ValidationReport(tuple(out))


@dataclass(frozen=True)
class DemandAnalysis:
    """Source/sink bipartition of a demand graph and its nesting structure.

    ``dominated_sources[i]`` holds the indices j whose out-neighborhood is
    contained in source i's (source i "dominates" them: separating i's
    sinks separates j's too).  ``allowed_sources[j]`` holds the indices of
    sources that have no demand edge to sink j, i.e. the sources that may
    keep reaching it.
    """

    sources: tuple[str, ...]
    sinks: tuple[str, ...]
    out_neighborhoods: tuple[frozenset[str], ...]
    dominated_sources: tuple[frozenset[int], ...]
    allowed_sources: tuple[frozenset[int], ...]

    @cached_property
    def source_index(self) -> dict[str, int]:
        return {s: i for i, s in enumerate(self.sources)}

    @cached_property
    def sink_index(self) -> dict[str, int]:
        return {t: j for j, t in enumerate(self.sinks)}


def analyze_demand(H: DemandGraph) -> DemandAnalysis:
    """Split terminals into sources and sinks with every edge source -> sink.

    Terminals with outgoing demand edges must be sources, terminals with
    incoming ones sinks; a terminal with both makes the split impossible.
    Isolated terminals are placed on the source side.
    """
    outs: dict[str, set[str]] = {t: set() for t in H.terminals}
    ins: dict[str, set[str]] = {t: set() for t in H.terminals}
    for s, t in H.edges:
        outs[s].add(t)
        ins[t].add(s)
    for v in H.terminals:
        if outs[v] and ins[v]:
            raise NotBipartiteError(
                f"terminal {v!r} has both outgoing and incoming demand edges"
            )
    sinks = tuple(t for t in H.terminals if ins[t])
    sources = tuple(t for t in H.terminals if not ins[t])
    nb = tuple(frozenset(outs[s]) for s in sources)
    p = len(sources)
    dominated = tuple(
        frozenset(j for j in range(p) if nb[j] <= nb[i]) for i in range(p)
    )
    allowed = tuple(
        frozenset(i for i in range(p) if (sources[i], t) not in H.edge_set)
        for t in sinks
    )
    return DemandAnalysis(sources, sinks, nb, dominated, allowed)


def find_induced_matching(H: DemandGraph, t: int, cap: int = DEFAULT_ENUM_CAP):
    """Search for t demand edges forming an induced matching (orientation ignored).

    The witness edges are pairwise vertex-disjoint and the demand graph has
    no edge between any two of the 2t endpoints other than the witness
    edges themselves.  The search is exhaustive over t-subsets of the
    distinct undirected pairs, in lexicographic order, so the returned
    witness is deterministic.  Endpoint sets must be disjoint: a vertex
    cannot serve in two witness edges.
    """
    if t < 1:
        raise ParameterError(f"matching size must be >= 1, got {t}")
    pairs = H.undirected_pairs
    if math.comb(len(pairs), t) > cap:
        raise SizeGuardError(
            f"C({len(pairs)}, {t}) subsets exceed enumeration cap {cap}"
        )
    pair_set = set(pairs)
    for combo in combinations(pairs, t):
        endpoints = [v for pair in combo for v in pair]
        if len(set(endpoints)) < 2 * t:
            continue
        chosen = set(combo)
        ok = True
        for x, y in combinations(sorted(set(endpoints)), 2):
            if (x, y) in pair_set and (x, y) not in chosen:
                ok = False
                break
        if ok:
            return tuple(_stored_orientation(H, pair) for pair in combo)
    return None


def _stored_orientation(H: DemandGraph, pair: tuple[str, str]) -> tuple[str, str]:
    for e in H.edges:
        if tuple(sorted(e)) == pair:
            return e
    raise KeyError(pair)


@dataclass(frozen=True)
class MatchingExtensionWitness:
    """Rows (s_i, t_i) of demand edges with no demand edge (s_i, t_j) for i > j.

    The s_i are pairwise distinct and so are the t_i, but an s_i may equal
    a t_j for i != j.
    """

    s_list: tuple[str, ...]
    t_list: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.s_list)

    def check(self, H: DemandGraph) -> bool:
        k = len(self.s_list)
        if len(self.t_list) != k:
            return False
        if len(set(self.s_list)) != k or len(set(self.t_list)) != k:
            return False
        edges = H.edge_set
        for i in range(k):
            if (self.s_list[i], self.t_list[i]) not in edges:
                return False
            for j in range(i):
                if (self.s_list[i], self.t_list[j]) in edges:
                    return False
        return True

    def prefix(self, k: int) -> "MatchingExtensionWitness":
        return MatchingExtensionWitness(self.s_list[:k], self.t_list[:k])


def find_matching_extension(H: DemandGraph, k: int, cap: int = DEFAULT_ENUM_CAP):
    """Exhaustive backtracking search for a k-row matching-extension witness.

    Rows are ordered selections of demand edges; candidates are tried in
    lexicographic edge order, so the first witness found is deterministic.
    Raises SizeGuardError after `cap` partial assignments.
    """
    if k < 1:
        raise ParameterError(f"extension size must be >= 1, got {k}")
    edges = sorted(set(H.edges))
    edge_set = set(edges)
    s_list: list[str] = []
    t_list: list[str] = []
    nodes = 0

    def rec() -> bool:
        nonlocal nodes
        if len(s_list) == k:
            return True
        for s, t in edges:
            nodes += 1
            if nodes > cap:
                raise SizeGuardError(f"witness search exceeded {cap} partial assignments")
            if s in s_list or t in t_list:
                continue
            if any((s, tj) in edge_set for tj in t_list):
                continue
            s_list.append(s)
            t_list.append(t)
            if rec():
                return True
            s_list.pop()
            t_list.pop()
        return False

    if rec():
        return MatchingExtensionWitness(tuple(s_list), tuple(t_list))
    return None


def decompose_bipartite(H: DemandGraph) -> list[DemandGraph]:
    """Split a demand graph into bipartite parts via bit positions.

    Terminals are padded with isolated dummies up to the next power of two
    (2^p vertices) and identified with p-bit vectors.  For each bit j there
    are two parts: edges whose tail has bit j clear and head has bit j set,
    and the reverse.  Every edge lands in at least one part (some bit
    differs across any edge), so the union of the parts' edge sets is the
    original edge set.  Dummy vertices never touch an edge and are dropped
    from the parts' terminal lists.
    """
    k = len(H.terminals)
    if k <= 1:
        return []
    p = max(1, math.ceil(math.log2(k)))
    padded = list(H.terminals)
    i = 0
    while len(padded) < (1 << p):
        name = f"{RESERVED_PREFIX}pad{i}"
        while name in padded:
            name += "_"
        padded.append(name)
        i += 1
    index = {v: n for n, v in enumerate(padded)}

    parts: list[DemandGraph] = []
    for j in range(1, p + 1):
        bit = lambda v: (index[v] >> (j - 1)) & 1  # noqa: E731
        low_high = tuple(e for e in H.edges if bit(e[0]) == 0 and bit(e[1]) == 1)
        high_low = tuple(e for e in H.edges if bit(e[0]) == 1 and bit(e[1]) == 0)
        parts.append(DemandGraph(H.terminals, low_high))
        parts.append(DemandGraph(H.terminals, high_low))
    return parts
