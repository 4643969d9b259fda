import math
import random

import pytest

from demandcut import (
    DemandGraph,
    analyze_demand,
    decompose_bipartite,
    find_induced_matching,
    find_matching_extension,
    make_instance,
    validate_instance,
)
from demandcut.errors import NotBipartiteError, ParameterError, SizeGuardError

from corpus import i1_instance


def complete_digraph(names):
    return DemandGraph.build([(u, v) for u in names for v in names if u != v], terminals=names)


def test_validate_well_formed_path():
    assert validate_instance(i1_instance()).ok


def test_validate_self_loop_demand():
    inst = make_instance(["s"], demands=[("s", "s")])
    report = validate_instance(inst)
    assert any("self-loop demand" in v for v in report.violations)


def test_validate_unknown_vertex():
    inst = make_instance(["s", "t"], directed=[("e1", "s", "q", 1)], demands=[("s", "t")])
    report = validate_instance(inst)
    assert any("unknown vertex 'q'" in v for v in report.violations)


def test_validate_duplicate_edge_id_and_negative_weight():
    inst = make_instance(
        ["s", "t"],
        directed=[("e1", "s", "t", 1), ("e1", "t", "s", -2)],
        demands=[("s", "t")],
    )
    got = "; ".join(validate_instance(inst).violations)
    assert "duplicate edge id" in got and "negative weight" in got


def test_analyze_demand_nesting_example():
    H = DemandGraph.build(
        [("a1", "b1"), ("a1", "b2"), ("a2", "b2")], terminals=["a1", "a2", "b1", "b2"]
    )
    analysis = analyze_demand(H)
    assert analysis.sources == ("a1", "a2")
    assert analysis.sinks == ("b1", "b2")
    assert analysis.dominated_sources == (frozenset({0, 1}), frozenset({1}))
    assert analysis.allowed_sources == (frozenset({1}), frozenset())


def test_analyze_demand_single_pair():
    analysis = analyze_demand(DemandGraph.build([("s", "t")]))
    assert analysis.dominated_sources == (frozenset({0}),)
    assert analysis.allowed_sources == (frozenset(),)


def test_analyze_demand_directed_cycle_not_bipartite():
    H = DemandGraph.build([("a", "b"), ("b", "c"), ("c", "a")])
    with pytest.raises(NotBipartiteError):
        analyze_demand(H)


def test_dominated_sets_are_reflexive():
    for seed in range(30):
        rng = random.Random(seed)
        src = [f"a{i}" for i in range(rng.randint(1, 4))]
        snk = [f"b{j}" for j in range(rng.randint(1, 4))]
        edges = [(u, v) for u in src for v in snk if rng.random() < 0.5]
        analysis = analyze_demand(DemandGraph.build(edges, terminals=src + snk))
        for i, dom in enumerate(analysis.dominated_sources):
            assert i in dom


def test_induced_matching_triangle_cast_is_2k2_free():
    # staircase pattern (s_i, t_j) for i <= j has no induced 2-matching
    for k in (2, 3, 4):
        src = [f"s{i}" for i in range(k)]
        snk = [f"t{i}" for i in range(k)]
        edges = [(src[i], snk[j]) for i in range(k) for j in range(k) if i <= j]
        H = DemandGraph.build(edges, terminals=src + snk)
        assert find_induced_matching(H, 2) is None


def test_induced_matching_two_disjoint_edges():
    H = DemandGraph.build([("s1", "t1"), ("s2", "t2")])
    witness = find_induced_matching(H, 2)
    assert witness is not None
    assert sorted(witness) == [("s1", "t1"), ("s2", "t2")]


def test_induced_matching_single_edge():
    assert find_induced_matching(DemandGraph.build([("s", "t")]), 2) is None


def test_induced_matching_needs_disjoint_endpoints():
    # edges share a vertex: never an induced matching
    H = DemandGraph.build([("s", "t"), ("t", "u")])
    assert find_induced_matching(H, 2) is None


def test_induced_matching_permutation_invariance():
    for seed in range(20):
        rng = random.Random(seed)
        names = [f"x{i}" for i in range(6)]
        edges = sorted(
            {(u, v) for u in names for v in names if u != v and rng.random() < 0.25}
        )
        if not edges:
            continue
        H = DemandGraph.build(edges, terminals=names)
        found = find_induced_matching(H, 2) is not None
        perm = dict(zip(names, rng.sample(names, len(names))))
        H2 = DemandGraph.build(
            [(perm[u], perm[v]) for u, v in edges], terminals=[perm[v] for v in names]
        )
        assert (find_induced_matching(H2, 2) is not None) == found


def test_induced_matching_size_guard():
    edges = [(f"s{i}", f"t{i}") for i in range(8)]
    H = DemandGraph.build(edges)
    with pytest.raises(SizeGuardError):
        find_induced_matching(H, 4, cap=10)
    with pytest.raises(ParameterError):
        find_induced_matching(H, 0)


def test_matching_extension_complete_digraph_three():
    H = complete_digraph(["x", "y", "z"])
    assert find_matching_extension(H, 3) is None
    # a 2-row witness does exist (reusing a vertex across rows)
    witness = find_matching_extension(H, 2)
    assert witness is not None and witness.check(H)


def brute_force_extension_exists(H, k):
    """Oracle: scan all ordered k-tuples of demand edges directly."""
    from itertools import product

    edges = sorted(set(H.edges))
    F = set(edges)
    for rows in product(edges, repeat=k):
        s_list = [r[0] for r in rows]
        t_list = [r[1] for r in rows]
        if len(set(s_list)) < k or len(set(t_list)) < k:
            continue
        if all(
            (s_list[i], t_list[j]) not in F for i in range(k) for j in range(i)
        ):
            return True
    return False


def test_matching_extension_complete_minus_perfect_matching():
    names = [f"n{i}" for i in range(6)]
    removed = set()
    for i in range(0, 6, 2):
        removed |= {(names[i], names[i + 1]), (names[i + 1], names[i])}
    edges = [(u, v) for u in names for v in names if u != v and (u, v) not in removed]
    H = DemandGraph.build(edges, terminals=names)
    assert find_matching_extension(H, 4) is None
    # even the 3-row witness is impossible here: a row's source must avoid
    # demand edges to all earlier sinks, and each sink only tolerates its
    # removed partner; the oracle confirms.
    assert not brute_force_extension_exists(H, 3)
    assert find_matching_extension(H, 3) is None
    witness = find_matching_extension(H, 2)
    assert witness is not None and witness.check(H)


def test_matching_extension_agrees_with_oracle():
    for seed in range(20):
        rng = random.Random(seed)
        names = [f"x{i}" for i in range(5)]
        edges = sorted(
            {(u, v) for u in names for v in names if u != v and rng.random() < 0.35}
        )
        H = DemandGraph.build(edges, terminals=names)
        for k in (2, 3):
            expected = brute_force_extension_exists(H, k)
            witness = find_matching_extension(H, k)
            assert (witness is not None) == expected
            if witness is not None:
                assert witness.check(H)


def test_matching_extension_disjoint_edges():
    for k in (1, 2, 4):
        edges = [(f"s{i}", f"t{i}") for i in range(k)]
        H = DemandGraph.build(edges)
        witness = find_matching_extension(H, k)
        assert witness is not None and witness.check(H)
        assert sorted(zip(witness.s_list, witness.t_list)) == edges


def test_matching_extension_prefixes_stay_valid():
    for seed in range(25):
        rng = random.Random(seed)
        names = [f"x{i}" for i in range(6)]
        edges = sorted(
            {(u, v) for u in names for v in names if u != v and rng.random() < 0.3}
        )
        H = DemandGraph.build(edges, terminals=names)
        for k in (3, 2, 1):
            witness = find_matching_extension(H, k)
            if witness is None:
                continue
            for kp in range(1, k + 1):
                assert witness.prefix(kp).check(H)


def test_matching_extension_size_guard():
    H = complete_digraph([f"n{i}" for i in range(6)])
    with pytest.raises(SizeGuardError):
        find_matching_extension(H, 4, cap=5)


def test_decompose_bidirected_pair():
    H = DemandGraph.build([("s0", "s1"), ("s1", "s0")], terminals=["s0", "s1"])
    parts = decompose_bipartite(H)
    assert len(parts) == 2
    assert parts[0].edges == (("s0", "s1"),)
    assert parts[1].edges == (("s1", "s0"),)


def test_decompose_single_edge():
    H = DemandGraph.build([("s0", "s1")], terminals=["s0", "s1"])
    parts = decompose_bipartite(H)
    assert len(parts) == 2
    assert parts[0].edges == (("s0", "s1"),)
    assert parts[1].edges == ()


def test_decompose_union_count_and_bipartiteness():
    for seed in range(25):
        rng = random.Random(seed)
        k = rng.randint(2, 8)
        names = [f"x{i}" for i in range(k)]
        edges = sorted(
            {(u, v) for u in names for v in names if u != v and rng.random() < 0.3}
        )
        H = DemandGraph.build(edges, terminals=names)
        parts = decompose_bipartite(H)
        assert len(parts) == 2 * max(1, math.ceil(math.log2(k)))
        union = set()
        for part in parts:
            union |= set(part.edges)
            analyze_demand(part)  # must not raise
            assert part.terminals == H.terminals
        assert union == set(edges)
