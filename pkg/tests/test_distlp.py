import math

import pytest

from demandcut import (
    brute_force_opt,
    build_distance_lp,
    flow_cut_gap,
    make_instance,
    shortest_paths,
    solve_distance_lp,
    verify_cut,
)
from demandcut.distlp import solution_cost
from demandcut.errors import (
    InfeasibleStructureError,
    InvalidCutError,
    NoFeasibleCutError,
    SizeGuardError,
)
from demandcut.lp import solve_lp

from corpus import i1_instance, i2_instance, random_instance

INF = math.inf


def brute_force_all_subsets(inst):
    """Independent oracle: check every finite-edge subset with a fresh BFS."""
    finite = [e for e in inst.supply.edges if not math.isinf(e.weight)]
    best = None
    for mask in range(1 << len(finite)):
        ids = {finite[i].id for i in range(len(finite)) if mask >> i & 1}
        cost = sum(finite[i].weight for i in range(len(finite)) if mask >> i & 1)
        if (best is None or cost < best) and verify_cut(inst, ids):
            best = cost
    return best


def test_distance_lp_values_match_oracle():
    i1 = i1_instance()
    assert brute_force_all_subsets(i1) == 1.0
    value, x = solve_distance_lp(i1)
    assert value == pytest.approx(1.0, abs=1e-6)

    i2 = i2_instance()
    assert brute_force_all_subsets(i2) == 2.0
    value2, _ = solve_distance_lp(i2)
    assert value2 == pytest.approx(2.0, abs=1e-6)


def test_distance_lp_empty_demands():
    inst = make_instance(["a", "b"], directed=[("e", "a", "b", 5)], demands=[])
    value, x = solve_distance_lp(inst)
    assert value == pytest.approx(0.0, abs=1e-9)
    assert x == {"e": 0.0}


def test_distance_lp_infinite_connection_rejected():
    inst = make_instance(
        ["s", "t"], directed=[("e", "s", "t", INF)], demands=[("s", "t")]
    )
    with pytest.raises(InfeasibleStructureError):
        build_distance_lp(inst)


def test_shortest_paths_on_path_instance():
    i1 = i1_instance()
    d = shortest_paths(i1, {"e1": 1.0, "e2": 0.0})
    assert d[("s", "a")] == pytest.approx(1.0)
    assert d[("s", "t")] == pytest.approx(1.0)
    assert d[("a", "t")] == pytest.approx(0.0)
    assert d[("t", "s")] == INF  # disconnected pair

    zeros = shortest_paths(i1, {"e1": 0.0, "e2": 0.0})
    assert zeros[("s", "t")] == 0.0


def test_shortest_paths_undirected_both_ways():
    inst = make_instance(["a", "b"], undirected=[("u", "a", "b", 1)], demands=[])
    d = shortest_paths(inst, {"u": 0.4})
    assert d[("a", "b")] == pytest.approx(0.4)
    assert d[("b", "a")] == pytest.approx(0.4)


def test_verify_cut():
    i1 = i1_instance()
    assert verify_cut(i1, {"e1"})
    assert not verify_cut(i1, set())
    i2 = i2_instance()
    assert verify_cut(i2, {"e1", "e3"})  # cut (s,m) and (t,m)
    with pytest.raises(InvalidCutError):
        verify_cut(i1, {"bogus"})
    inf_inst = make_instance(
        ["s", "t"], directed=[("e", "s", "t", INF)], demands=[]
    )
    with pytest.raises(InvalidCutError):
        verify_cut(inf_inst, {"e"})


def test_brute_force_opt_examples():
    cut1 = brute_force_opt(i1_instance())
    assert cut1.cost == 1.0 and cut1.edges == frozenset({"e1"})
    assert brute_force_opt(i2_instance()).cost == 2.0
    empty = make_instance(["a"], demands=[])
    assert brute_force_opt(empty).edges == frozenset()


def test_brute_force_opt_tie_breaks_lexicographically():
    inst = make_instance(
        ["s", "a", "t"],
        directed=[("ea", "s", "a", 1), ("eb", "a", "t", 1)],
        demands=[("s", "t")],
    )
    assert brute_force_opt(inst).edges == frozenset({"ea"})


def test_brute_force_opt_guards():
    inst = make_instance(
        ["s", "t"],
        directed=[(f"e{i}", "s", "t", 1) for i in range(3)],
        demands=[("s", "t")],
    )
    with pytest.raises(SizeGuardError):
        brute_force_opt(inst, cap=2)
    inf_inst = make_instance(
        ["s", "t"],
        directed=[("e", "s", "t", INF), ("f", "s", "t", 1)],
        demands=[("s", "t")],
    )
    with pytest.raises(NoFeasibleCutError):
        brute_force_opt(inf_inst)


def test_flow_cut_gap_path():
    report = flow_cut_gap(i1_instance())
    assert report.ratio == pytest.approx(1.0, abs=1e-6)
    assert report.opt_cut.edges == frozenset({"e1"})


def test_lp_below_opt_and_feasibility_of_lp_solution():
    for seed in range(25):
        inst = random_instance(seed, directedness="mixed", bipartite=True)
        value, x = solve_distance_lp(inst)
        opt = brute_force_opt(inst)
        assert value <= opt.cost + 1e-6
        assert verify_cut(inst, opt)
        assert value == pytest.approx(solution_cost(inst, x), abs=1e-6)
        d = shortest_paths(inst, x)
        for s, t in inst.demand.edges:
            assert d[(s, t)] >= 1.0 - 1e-6


def test_gap_ratio_at_least_one():
    for seed in range(15):
        inst = random_instance(seed + 500, directedness="directed")
        report = flow_cut_gap(inst)
        assert report.ratio >= 1.0 - 1e-9


def test_demand_monotonicity():
    # adding a demand edge never decreases LP value or OPT
    for seed in range(12):
        inst = random_instance(seed, directedness="directed", term_range=(3, 3))
        terms = inst.demand.terminals
        existing = set(inst.demand.edges)
        candidates = [
            (u, v) for u in terms for v in terms if u != v and (u, v) not in existing
        ]
        if not candidates:
            continue
        extra = candidates[0]
        bigger = make_instance(
            inst.supply.vertices,
            directed=[(e.id, e.tail, e.head, e.weight) for e in inst.supply.directed_edges],
            undirected=[(e.id, e.tail, e.head, e.weight) for e in inst.supply.undirected_edges],
            demands=list(inst.demand.edges) + [extra],
            terminals=terms,
        )
        v1, _ = solve_distance_lp(inst)
        v2, _ = solve_distance_lp(bigger)
        assert v2 >= v1 - 1e-6
        assert brute_force_opt(bigger).cost >= brute_force_opt(inst).cost - 1e-9
