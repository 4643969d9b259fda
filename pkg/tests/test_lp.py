import math
import random
from itertools import combinations

import numpy as np
import pytest

from demandcut.lp import (
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    LinearProgram,
    check_point,
    export_lp_text,
    solve_lp,
)
from demandcut.errors import DimensionMismatchError, ValidationError
from demandcut.distlp import build_distance_lp

from corpus import i1_instance


def test_single_variable_lower_bound():
    lp = LinearProgram()
    lp.add_variable("x", 0.0, 10.0, objective=1.0)
    lp.add_constraint({"x": 1.0}, ">=", 1.0)
    res = solve_lp(lp)
    assert res.status == OPTIMAL
    assert res.objective_value == pytest.approx(1.0, abs=1e-9)
    assert res.values["x"] == pytest.approx(1.0, abs=1e-9)


def test_equality_forces_objective():
    lp = LinearProgram()
    lp.add_variable("x", objective=1.0)
    lp.add_variable("y", objective=1.0)
    lp.add_constraint({"x": 1.0, "y": 1.0}, "=", 1.0)
    res = solve_lp(lp)
    assert res.status == OPTIMAL
    assert res.objective_value == pytest.approx(1.0, abs=1e-9)


def test_infeasible_and_unbounded_statuses():
    lp = LinearProgram()
    lp.add_variable("x", 0.0, 1.0)
    lp.add_constraint({"x": 1.0}, ">=", 2.0)
    assert solve_lp(lp).status == INFEASIBLE

    lp2 = LinearProgram()
    lp2.add_variable("x", 0.0, math.inf, objective=-1.0)
    assert solve_lp(lp2).status == UNBOUNDED


def test_distance_lp_of_path_instance():
    # oracle: 4 cut subsets give integral optimum 1; single-pair LP is exact
    res = solve_lp(build_distance_lp(i1_instance()))
    assert res.status == OPTIMAL
    assert res.objective_value == pytest.approx(1.0, abs=1e-6)


def test_check_point():
    lp = LinearProgram()
    lp.add_variable("x", 0.0, 2.0)
    lp.add_variable("y", 0.0, 2.0)
    lp.add_constraint({"x": 1.0, "y": 1.0}, "=", 2.0)
    assert check_point(lp, {"x": 1.0, "y": 1.0})
    assert not check_point(lp, {"x": 2.0, "y": 2.0})
    assert not check_point(lp, {"x": 3.0, "y": -1.0})
    with pytest.raises(DimensionMismatchError):
        check_point(lp, [1.0])
    with pytest.raises(DimensionMismatchError):
        check_point(lp, {"x": 1.0})


def test_solved_point_passes_its_own_program():
    lp = LinearProgram()
    lp.add_variable("x", 0.0, 5.0, objective=2.0)
    lp.add_variable("y", 0.0, 5.0, objective=1.0)
    lp.add_constraint({"x": 1.0, "y": 2.0}, ">=", 3.0)
    lp.add_constraint({"x": 1.0, "y": -1.0}, "<=", 2.0)
    res = solve_lp(lp)
    assert res.status == OPTIMAL
    assert check_point(lp, res.values, tol=1e-8)


def test_duplicate_variable_and_bad_constraint_rejected():
    lp = LinearProgram()
    lp.add_variable("x")
    with pytest.raises(ValidationError):
        lp.add_variable("x")
    with pytest.raises(ValidationError):
        lp.add_constraint({"nope": 1.0}, "<=", 0.0)
    with pytest.raises(ValidationError):
        lp.add_constraint({"x": 1.0}, "<", 0.0)
    with pytest.raises(ValidationError):
        lp.add_variable("y", 2.0, 1.0)


def _random_lp(rng, n_vars):
    """Small LP with finite box bounds (bounded feasible region)."""
    lp = LinearProgram()
    names = [f"x{i}" for i in range(n_vars)]
    bounds = []
    for name in names:
        lo = rng.randint(-3, 0)
        hi = lo + rng.randint(1, 5)
        lp.add_variable(name, lo, hi, objective=rng.randint(-5, 5))
        bounds.append((lo, hi))
    for _ in range(rng.randint(1, 12 - 2 * n_vars)):
        coeffs = {name: rng.randint(-3, 3) for name in names}
        if all(c == 0 for c in coeffs.values()):
            continue
        rel = rng.choice(["<=", ">="])
        lp.add_constraint(coeffs, rel, rng.randint(-4, 6))
    return lp, names, bounds


def _vertex_enumeration_optimum(lp, names, bounds):
    """Oracle: enumerate basic points from all n-subsets of tight constraints."""
    n = len(names)
    rows = []
    rhs = []
    for con in lp.constraints:
        rows.append([con.coeffs.get(name, 0.0) for name in names])
        rhs.append(con.rhs)
    for i, (lo, hi) in enumerate(bounds):
        row = [0.0] * n
        row[i] = 1.0
        rows.append(list(row))
        rhs.append(lo)
        rows.append(list(row))
        rhs.append(hi)
    best = None
    c = np.array([lp.objective.get(name, 0.0) for name in names])
    for subset in combinations(range(len(rows)), n):
        mat = np.array([rows[i] for i in subset])
        if abs(np.linalg.det(mat)) < 1e-9:
            continue
        point = np.linalg.solve(mat, np.array([rhs[i] for i in subset]))
        if check_point(lp, point.tolist(), tol=1e-7):
            value = float(c @ point)
            if best is None or value < best:
                best = value
    return best


def test_matches_vertex_enumeration_oracle():
    solved = 0
    for seed in range(80):
        rng = random.Random(seed)
        lp, names, bounds = _random_lp(rng, rng.choice([2, 3]))
        res = solve_lp(lp)
        oracle = _vertex_enumeration_optimum(lp, names, bounds)
        if res.status == INFEASIBLE:
            assert oracle is None
            continue
        assert res.status == OPTIMAL
        assert oracle is not None
        assert res.objective_value == pytest.approx(oracle, abs=1e-6)
        solved += 1
    assert solved >= 30


def test_constraint_permutation_stability():
    for seed in range(10):
        rng = random.Random(100 + seed)
        lp, names, bounds = _random_lp(rng, 3)
        res = solve_lp(lp)
        if res.status != OPTIMAL:
            continue
        rng.shuffle(lp.constraints)
        res2 = solve_lp(lp)
        assert abs(res.objective_value - res2.objective_value) <= 1e-9


def test_export_text_sections():
    lp = LinearProgram()
    lp.add_variable("x", 0.0, 1.0, objective=2.5)
    lp.add_variable("y", 0.0, math.inf)
    lp.add_constraint({"x": 1.0, "y": -1.0}, ">=", 0.5)
    text = export_lp_text(lp)
    assert text.startswith("Minimize")
    for section in ("Subject To", "Bounds", "End"):
        assert section in text
    assert "2.5 x" in text
    assert "+inf" in text
