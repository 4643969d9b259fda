import math
import random

import pytest

from demandcut import (
    brute_force_opt,
    build_label_lp,
    distlp_to_label,
    label_to_distlp,
    make_instance,
    solve_distance_lp,
    transport_labels,
)
from demandcut.errors import (
    InfeasibleInputError,
    MarginalMismatchError,
    SizeGuardError,
)
from demandcut.labellp import (
    LabelSolution,
    check_label_solution,
    label_cost,
    label_solution_from_result,
)
from demandcut.labels import label_leq
from demandcut.lp import OPTIMAL, LinearProgram, solve_lp

from corpus import i1_instance, i2_instance, integral_label_solution, random_instance


def solve_label(inst):
    res = solve_lp(build_label_lp(inst))
    assert res.status == OPTIMAL
    return res


def test_label_lp_values():
    assert solve_label(i1_instance()).objective_value == pytest.approx(1.0, abs=1e-6)
    assert solve_label(i2_instance()).objective_value == pytest.approx(2.0, abs=1e-6)
    empty = make_instance(["a", "b"], directed=[("e", "a", "b", 3)], demands=[])
    assert solve_label(empty).objective_value == pytest.approx(0.0, abs=1e-9)


def test_label_lp_size_guard():
    inst = make_instance(
        [f"v{i}" for i in range(5)],
        demands=[(f"v{i}", f"v{i+1}") for i in range(0, 4, 2)],
        terminals=[f"v{i}" for i in range(5)],
    )
    with pytest.raises(SizeGuardError):
        build_label_lp(inst, label_cap=4)


def test_chain_construction_masses():
    # two terminals at clamped distances 0.3 and 0.7 from u
    inst = make_instance(
        ["s1", "s2", "u", "w1", "w2"],
        directed=[
            ("a", "s1", "u", 1),
            ("b", "s2", "u", 1),
            ("c", "u", "w1", 1),
            ("d", "u", "w2", 1),
        ],
        demands=[("s1", "w1"), ("s2", "w2")],
        terminals=["s1", "s2", "w1", "w2"],
    )
    x = {"a": 0.3, "b": 0.7, "c": 0.7, "d": 0.3}
    sol = distlp_to_label(inst, x)
    # bit order s1 s2 w1 w2; labels written msb-first
    dist = sol.vertex_dist["u"]
    labelled = {format(lab, "04b"): mass for lab, mass in dist.items()}
    assert labelled["0000"] == pytest.approx(0.3)
    assert labelled["1000"] == pytest.approx(0.4)
    assert labelled["1100"] == pytest.approx(0.3)


def test_terminals_labelled_correctly():
    inst = i1_instance()
    _, x = solve_distance_lp(inst)
    sol = distlp_to_label(inst, x)
    k = len(inst.demand.terminals)
    for i, term in enumerate(inst.demand.terminals):
        for lab, mass in sol.vertex_dist[term].items():
            if mass > 1e-9:
                assert (lab >> (k - 1 - i)) & 1 == 1


def test_distlp_to_label_cost_and_feasibility_on_path():
    inst = i1_instance()
    sol = distlp_to_label(inst, {"e1": 1.0, "e2": 0.0})
    assert check_label_solution(inst, sol) == []
    assert label_cost(inst, sol) == pytest.approx(1.0, abs=1e-9)


def test_distlp_to_label_rejects_infeasible_x():
    inst = i1_instance()
    with pytest.raises(InfeasibleInputError):
        distlp_to_label(inst, {"e1": 0.0, "e2": 0.0})


def test_label_to_distlp_roundtrip_on_path():
    inst = i1_instance()
    res = solve_label(inst)
    sol = label_solution_from_result(inst, res)
    x = label_to_distlp(inst, sol)
    assert x == sol.x
    assert sum(
        e.weight * x[e.id] for e in inst.supply.edges
    ) == pytest.approx(res.objective_value, abs=1e-6)


def test_label_to_distlp_rejects_bad_solution():
    inst = i1_instance()
    res = solve_label(inst)
    sol = label_solution_from_result(inst, res)
    sol.x = {"e1": 0.0, "e2": 0.0}
    with pytest.raises(InfeasibleInputError):
        label_to_distlp(inst, sol)


def test_integral_solutions_stay_integral():
    inst = i2_instance()
    cut = brute_force_opt(inst)
    sol = integral_label_solution(inst, cut.edges)
    assert check_label_solution(inst, sol) == []
    x = label_to_distlp(inst, sol)
    assert all(v in (0.0, 1.0) for v in x.values())
    back = distlp_to_label(inst, x)
    for dist in back.vertex_dist.values():
        for mass in dist.values():
            assert mass == pytest.approx(1.0, abs=1e-9) or mass == pytest.approx(0.0, abs=1e-9)


def test_transport_point_masses():
    joint, cost = transport_labels({1: 1.0}, {1: 1.0}, "directed")
    assert cost == 0.0 and joint == {(1, 1): 1.0}
    _, cost_bad = transport_labels({1: 1.0}, {0: 1.0}, "directed")
    assert cost_bad == pytest.approx(1.0)
    _, cost_und = transport_labels({1: 1.0}, {0: 1.0}, "undirected")
    assert cost_und == pytest.approx(1.0)


def test_transport_marginal_mismatch():
    with pytest.raises(MarginalMismatchError):
        transport_labels({1: 0.5}, {1: 1.0}, "directed")


def _chain_from_distances(dists):
    """Chain distribution over nested labels from sorted clamped distances."""
    k = len(dists)
    order = sorted(range(k), key=lambda i: (dists[i], i))
    out = {}
    label = 0
    prev = 0.0
    for i in order:
        if dists[i] - prev > 0:
            out[label] = out.get(label, 0.0) + (dists[i] - prev)
        label |= 1 << (k - 1 - i)
        prev = dists[i]
    if 1.0 - prev > 0 or not out:
        out[label] = out.get(label, 0.0) + (1.0 - prev)
    return out


def _transport_lp_oracle(zu, zv, mode):
    lp = LinearProgram()
    for lu in zu:
        for lv in zv:
            if mode == "directed":
                cost = 0.0 if label_leq(lu, lv) else 1.0
            else:
                cost = 0.0 if lu == lv else 1.0
            lp.add_variable(f"f{lu}.{lv}", 0.0, 1.0, objective=cost)
    for lu in zu:
        lp.add_constraint({f"f{lu}.{lv}": 1.0 for lv in zv}, "=", zu[lu])
    for lv in zv:
        lp.add_constraint({f"f{lu}.{lv}": 1.0 for lu in zu}, "=", zv[lv])
    res = solve_lp(lp)
    assert res.status == OPTIMAL
    return res.objective_value


def test_transport_chain_example():
    zu = _chain_from_distances([0.3, 0.7])
    zv = _chain_from_distances([0.5, 0.7])
    joint, cost = transport_labels(zu, zv, "directed")
    assert cost <= 0.2 + 1e-12
    assert cost == pytest.approx(_transport_lp_oracle(zu, zv, "directed"), abs=1e-9)
    # marginals preserved
    for lu in zu:
        assert sum(m for (a, _), m in joint.items() if a == lu) == pytest.approx(zu[lu])


def test_transport_greedy_matches_lp_oracle_on_random_chains():
    for seed in range(30):
        rng = random.Random(seed)
        k = rng.randint(1, 4)
        zu = _chain_from_distances(sorted(round(rng.random(), 3) for _ in range(k)))
        zv = _chain_from_distances(sorted(round(rng.random(), 3) for _ in range(k)))
        for mode in ("directed", "undirected"):
            _, cost = transport_labels(zu, zv, mode)
            assert cost == pytest.approx(_transport_lp_oracle(zu, zv, mode), abs=1e-8)


def test_transport_general_distributions_use_lp():
    # non-chain support: labels 01 and 10 are incomparable
    zu = {1: 0.5, 2: 0.5}
    zv = {3: 1.0}
    _, cost = transport_labels(zu, zv, "directed")
    assert cost == pytest.approx(0.0, abs=1e-9)
    _, cost_u = transport_labels(zu, zv, "undirected")
    assert cost_u == pytest.approx(1.0, abs=1e-9)


def test_equivalence_on_theorem_domain():
    # directed supply with arbitrary demands, mixed supply with bipartite demands
    for seed in range(10):
        for kwargs in (
            {"directedness": "directed", "bipartite": False},
            {"directedness": "mixed", "bipartite": True},
        ):
            inst = random_instance(seed, **kwargs)
            dist_value, x = solve_distance_lp(inst)
            label_value = solve_label(inst).objective_value
            assert label_value == pytest.approx(dist_value, abs=1e-5)
            sol = distlp_to_label(inst, x)
            assert check_label_solution(inst, sol) == []
            assert label_cost(inst, sol) <= dist_value + 1e-6


def test_label_relaxation_dominates_distance_relaxation():
    # holds unconditionally: any label solution projects to a distance solution
    for seed in range(8):
        inst = random_instance(seed, directedness="undirected", bipartite=False)
        dist_value, _ = solve_distance_lp(inst)
        assert solve_label(inst).objective_value >= dist_value - 1e-6


def test_boundary_undirected_nonbipartite_gap():
    # Outside the exchange's hypotheses (undirected supply edges with a
    # non-bipartite demand graph) the label relaxation is strictly stronger.
    inst = make_instance(
        ["v1", "v2", "v3", "v4", "v6"],
        undirected=[
            ("u2", "v1", "v4", 5),
            ("u3", "v2", "v3", 10),
            ("u4", "v2", "v4", 5),
            ("u5", "v2", "v6", 6),
        ],
        demands=[("v3", "v1"), ("v6", "v1"), ("v6", "v3")],
        terminals=["v1", "v6", "v3"],
    )
    dist_value, _ = solve_distance_lp(inst)
    label_value = solve_label(inst).objective_value
    assert dist_value == pytest.approx(10.5, abs=1e-6)
    assert label_value == pytest.approx(11.0, abs=1e-6)
