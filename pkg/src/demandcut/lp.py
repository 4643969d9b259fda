"""Self-contained linear-program container with a HiGHS-backed solver.

Every relaxation in the package is assembled as a `LinearProgram` (named
variables with box bounds, sparse constraint rows, minimization objective)
and handed to `solve_lp`.  Programs can also be exported in the fixed LP
text layout for cross-checking with external solvers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .errors import (
    DimensionMismatchError,
    NumericFailureError,
    ValidationError,
)

FEAS_TOL = 1e-9
VALUE_TOL = 1e-6
INF_UB = math.inf

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_RELATIONS = ("<=", "=", ">=")


@dataclass
class Constraint:
    coeffs: dict[str, float]
    relation: str
    rhs: float


class LinearProgram:
    """Minimization LP over named, box-bounded variables."""

    def __init__(self) -> None:
        self._names: list[str] = []
        self._index: dict[str, int] = {}
        self._lower: list[float] = []
        self._upper: list[float] = []
        self.objective: dict[str, float] = {}
        self.constraints: list[Constraint] = []

    def add_variable(self, name: str, lower: float = 0.0, upper: float = INF_UB, objective: float = 0.0) -> str:
        if name in self._index:
            raise ValidationError(f"duplicate variable {name!r}")
        if math.isnan(lower) or math.isnan(upper) or lower > upper:
            raise ValidationError(f"invalid bounds [{lower}, {upper}] for {name!r}")
        self._index[name] = len(self._names)
        self._names.append(name)
        self._lower.append(lower)
        self._upper.append(upper)
        if objective:
            self.objective[name] = self.objective.get(name, 0.0) + objective
        return name

    def add_objective(self, name: str, coeff: float) -> None:
        if name not in self._index:
            raise ValidationError(f"unknown variable {name!r} in objective")
        self.objective[name] = self.objective.get(name, 0.0) + coeff

    def add_constraint(self, coeffs: dict[str, float], relation: str, rhs: float) -> None:
        if relation not in _RELATIONS:
            raise ValidationError(f"unknown relation {relation!r}")
        for name in coeffs:
            if name not in self._index:
                raise ValidationError(f"unknown variable {name!r} in constraint")
        self.constraints.append(Constraint(dict(coeffs), relation, float(rhs)))

    @property
    def variables(self) -> list[tuple[str, float, float]]:
        return [(n, self._lower[i], self._upper[i]) for i, n in enumerate(self._names)]

    @property
    def variable_names(self) -> list[str]:
        return list(self._names)

    def variable_count(self) -> int:
        return len(self._names)

    def index_of(self, name: str) -> int:
        return self._index[name]


@dataclass
class LPResult:
    status: str
    objective_value: float | None
    values: dict[str, float]


def _as_vector(lp: LinearProgram, point) -> np.ndarray:
    n = lp.variable_count()
    if isinstance(point, dict):
        missing = [name for name in lp.variable_names if name not in point]
        extra = [name for name in point if name not in lp._index]
        if missing or extra:
            raise DimensionMismatchError(
                f"point keys do not match variables (missing {missing[:3]}, extra {extra[:3]})"
            )
        return np.array([point[name] for name in lp.variable_names], dtype=float)
    vec = np.asarray(list(point), dtype=float)
    if vec.shape != (n,):
        raise DimensionMismatchError(f"expected {n} values, got {vec.shape}")
    return vec


def check_point(lp: LinearProgram, point, tol: float = FEAS_TOL) -> bool:
    """True iff the point satisfies all bounds and constraints within tol."""
    x = _as_vector(lp, point)
    lower = np.array(lp._lower)
    upper = np.array(lp._upper)
    if np.any(x < lower - tol) or np.any(x > upper + tol):
        return False
    for con in lp.constraints:
        lhs = sum(c * x[lp.index_of(name)] for name, c in con.coeffs.items())
        if con.relation == "<=" and lhs > con.rhs + tol:
            return False
        if con.relation == ">=" and lhs < con.rhs - tol:
            return False
        if con.relation == "=" and abs(lhs - con.rhs) > tol:
            return False
    return True


def solve_lp(lp: LinearProgram, tol: float = FEAS_TOL) -> LPResult:
    """Solve to optimality; statuses besides optimal/infeasible/unbounded raise.

    Results are deterministic for identical input.  An optimal result is
    re-verified to be primal-feasible within `tol`.
    """
    n = lp.variable_count()
    if n == 0:
        return LPResult(OPTIMAL, 0.0, {})
    c = np.zeros(n)
    for name, coeff in lp.objective.items():
        c[lp.index_of(name)] += coeff

    ub_rows: list[tuple[dict[str, float], float]] = []
    eq_rows: list[tuple[dict[str, float], float]] = []
    for con in lp.constraints:
        if con.relation == "<=":
            ub_rows.append((con.coeffs, con.rhs))
        elif con.relation == ">=":
            ub_rows.append(({k: -v for k, v in con.coeffs.items()}, -con.rhs))
        else:
            eq_rows.append((con.coeffs, con.rhs))

    def build(rows):
        if not rows:
            return None, None
        data, ri, ci = [], [], []
        rhs = np.zeros(len(rows))
        for r, (coeffs, b) in enumerate(rows):
            rhs[r] = b
            for name, coeff in coeffs.items():
                data.append(coeff)
                ri.append(r)
                ci.append(lp.index_of(name))
        mat = sp.csr_matrix((data, (ri, ci)), shape=(len(rows), n))
        return mat, rhs

    a_ub, b_ub = build(ub_rows)
    a_eq, b_eq = build(eq_rows)
    bounds = list(zip(lp._lower, [u if not math.isinf(u) else None for u in lp._upper]))
    res = linprog(
        c,
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=bounds,
        method="highs",
        options={
            "primal_feasibility_tolerance": 1e-10,
            "dual_feasibility_tolerance": 1e-10,
        },
    )
    if res.status == 2:
        return LPResult(INFEASIBLE, None, {})
    if res.status == 3:
        return LPResult(UNBOUNDED, None, {})
    if res.status != 0:
        raise NumericFailureError(f"LP backend stopped: {res.message}")
    values = {name: float(res.x[i]) for i, name in enumerate(lp.variable_names)}
    if not check_point(lp, values, tol=max(tol, 1e-8)):
        raise NumericFailureError("optimal point failed the feasibility re-check")
    return LPResult(OPTIMAL, float(res.fun), values)


def export_lp_text(lp: LinearProgram) -> str:
    """Fixed-format LP text (objective, constraints, bounds sections)."""

    def term(coeff: float, name: str, lead: bool) -> str:
        sign = "-" if coeff < 0 else ("" if lead else "+")
        mag = abs(coeff)
        return f"{sign} {mag:.12g} {name}".strip()

    lines = ["Minimize", " obj: " + (" ".join(
        term(lp.objective[name], name, i == 0)
        for i, name in enumerate(n for n in lp.variable_names if n in lp.objective)
    ) or "0")]
    lines.append("Subject To")
    rel_text = {"<=": "<=", ">=": ">=", "=": "="}
    for idx, con in enumerate(lp.constraints):
        body = " ".join(
            term(coeff, name, i == 0) for i, (name, coeff) in enumerate(sorted(con.coeffs.items()))
        )
        lines.append(f" c{idx}: {body} {rel_text[con.relation]} {con.rhs:.12g}")
    lines.append("Bounds")
    for name, lo, hi in lp.variables:
        hi_text = "+inf" if math.isinf(hi) else f"{hi:.12g}"
        lines.append(f" {lo:.12g} <= {name} <= {hi_text}")
    lines.append("End")
    return "\n".join(lines) + "\n"
