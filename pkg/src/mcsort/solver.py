"""Abstract LP/MILP container and the HiGHS backend (via scipy.optimize.milp).

Every optimization model in the package is expressed as a LinearProgram and
handed to solve(); the backend is replaceable behind that boundary.  HiGHS
is deterministic, so solving the same program twice yields identical status
and objective value.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
import scipy.sparse as sp
from scipy.optimize import Bounds, LinearConstraint, linprog, milp

FEASIBILITY_TOL = 1e-7
INTEGRALITY_TOL = 1e-6
MIP_REL_GAP = 1e-6

LE, GE, EQ = "<=", ">=", "=="

SIMPLEX = "simplex"
INTERIOR_POINT = "interior-point"


class Status(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class BackendFailure(RuntimeError):
    """Solver crashed, hit a limit, or reported numerical trouble."""


@dataclass(frozen=True)
class Variable:
    name: str
    lb: float
    ub: float
    integer: bool = False


@dataclass(frozen=True)
class Row:
    coeffs: tuple[tuple[int, float], ...]
    sense: str
    rhs: float
    name: str = ""


@dataclass(frozen=True)
class LinearProgram:
    variables: tuple[Variable, ...]
    rows: tuple[Row, ...]
    objective: tuple[tuple[int, float], ...]
    maximize: bool = False
    name: str = "program"


class ProgramBuilder:
    """Incremental construction of a LinearProgram."""

    def __init__(self, name: str = "program"):
        self.name = name
        self._vars: list[Variable] = []
        self._rows: list[Row] = []
        self._objective: dict[int, float] = {}
        self._maximize = False

    def add_variable(
        self, name: str, lb: float = 0.0, ub: float = np.inf, integer: bool = False
    ) -> int:
        self._vars.append(Variable(name, float(lb), float(ub), integer))
        return len(self._vars) - 1

    def add_row(self, coeffs: Mapping[int, float], sense: str, rhs: float, name: str = "") -> int:
        if sense not in (LE, GE, EQ):
            raise ValueError(f"unknown row sense {sense!r}")
        row = Row(tuple(sorted(coeffs.items())), sense, float(rhs), name)
        self._rows.append(row)
        return len(self._rows) - 1

    def set_objective(self, coeffs: Mapping[int, float], maximize: bool = False) -> None:
        self._objective = dict(coeffs)
        self._maximize = maximize

    @property
    def num_variables(self) -> int:
        return len(self._vars)

    @property
    def num_rows(self) -> int:
        return len(self._rows)

    def build(self) -> LinearProgram:
        if not self._vars:
            raise ValueError("program has no variables")
        return LinearProgram(
            variables=tuple(self._vars),
            rows=tuple(self._rows),
            objective=tuple(sorted(self._objective.items())),
            maximize=self._maximize,
            name=self.name,
        )


@dataclass(frozen=True)
class Solution:
    status: Status
    objective: float
    values: np.ndarray

    def value(self, index: int) -> float:
        return float(self.values[index])


def _constraint_matrix(program: LinearProgram) -> tuple[sp.csr_matrix, np.ndarray, np.ndarray]:
    data, rows_ix, cols_ix = [], [], []
    lb = np.empty(len(program.rows))
    ub = np.empty(len(program.rows))
    for r, row in enumerate(program.rows):
        for c, coeff in row.coeffs:
            rows_ix.append(r)
            cols_ix.append(c)
            data.append(coeff)
        if row.sense == LE:
            lb[r], ub[r] = -np.inf, row.rhs
        elif row.sense == GE:
            lb[r], ub[r] = row.rhs, np.inf
        else:
            lb[r], ub[r] = row.rhs, row.rhs
    mat = sp.csr_matrix(
        (data, (rows_ix, cols_ix)), shape=(len(program.rows), len(program.variables))
    )
    return mat, lb, ub


def solve(
    program: LinearProgram,
    *,
    mip_rel_gap: float = MIP_REL_GAP,
    algorithm: str = SIMPLEX,
) -> Solution:
    """Solve to global optimality; raises BackendFailure on solver trouble.

    The objective optimum is unique; under degeneracy the returned variable
    values depend on the algorithm.  `interior-point` asks for the optimal
    point the barrier method converges to instead of a simplex vertex
    (meaningful only for continuous programs).
    """
    nvar = len(program.variables)
    c = np.zeros(nvar)
    for idx, coeff in program.objective:
        c[idx] = coeff
    sign = -1.0 if program.maximize else 1.0
    integrality = np.array([1 if v.integer else 0 for v in program.variables])
    if algorithm == INTERIOR_POINT and not integrality.any():
        return _solve_linprog(program, sign * c, sign, method="highs-ipm")
    bounds = Bounds(
        np.array([v.lb for v in program.variables]),
        np.array([v.ub for v in program.variables]),
    )
    constraints = []
    if program.rows:
        mat, lb, ub = _constraint_matrix(program)
        constraints.append(LinearConstraint(mat, lb, ub))
    options = {"mip_rel_gap": mip_rel_gap} if integrality.any() else None
    res = milp(
        c=sign * c,
        constraints=constraints,
        bounds=bounds,
        integrality=integrality,
        options=options,
    )
    if res.status == 0:
        return Solution(Status.OPTIMAL, sign * float(res.fun), np.asarray(res.x, dtype=float))
    if res.status == 2:
        return Solution(Status.INFEASIBLE, np.nan, np.full(nvar, np.nan))
    if res.status == 3:
        return Solution(Status.UNBOUNDED, np.nan, np.full(nvar, np.nan))
    raise BackendFailure(f"{program.name}: {res.message}")


def _solve_linprog(program: LinearProgram, c: np.ndarray, sign: float, method: str) -> Solution:
    nvar = len(program.variables)
    mat, lb, ub = _constraint_matrix(program)
    upper_rows = np.flatnonzero(np.isfinite(ub))
    lower_rows = np.flatnonzero(np.isfinite(lb))
    a_ub = sp.vstack([mat[upper_rows], -mat[lower_rows]]) if len(program.rows) else None
    b_ub = np.concatenate([ub[upper_rows], -lb[lower_rows]]) if len(program.rows) else None
    bounds = [
        (v.lb, None if np.isinf(v.ub) else v.ub) for v in program.variables
    ]
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method=method)
    if res.status == 0:
        return Solution(Status.OPTIMAL, sign * float(res.fun), np.asarray(res.x, dtype=float))
    if res.status == 2:
        return Solution(Status.INFEASIBLE, np.nan, np.full(nvar, np.nan))
    if res.status == 3:
        return Solution(Status.UNBOUNDED, np.nan, np.full(nvar, np.nan))
    raise BackendFailure(f"{program.name}: {res.message}")


def max_violation(program: LinearProgram, values: np.ndarray) -> float:
    """Largest constraint/bound violation of a candidate point (for checking)."""
    worst = 0.0
    for v, x in zip(program.variables, values):
        worst = max(worst, v.lb - x, x - v.ub)
        if v.integer:
            worst = max(worst, abs(x - round(x)))
    for row in program.rows:
        lhs = sum(coeff * values[idx] for idx, coeff in row.coeffs)
        if row.sense == LE:
            worst = max(worst, lhs - row.rhs)
        elif row.sense == GE:
            worst = max(worst, row.rhs - lhs)
        else:
            worst = max(worst, abs(lhs - row.rhs))
    return worst


def write_lp(program: LinearProgram) -> str:
    """Render the program in LP text format for auditing with external solvers."""
    names = [v.name.replace(" ", "_") for v in program.variables]
    out = [f"\\ {program.name}"]
    out.append("Maximize" if program.maximize else "Minimize")
    out.append(" obj: " + _lin_str(program.objective, names))
    out.append("Subject To")
    for r, row in enumerate(program.rows):
        label = row.name or f"c{r}"
        op = {LE: "<=", GE: ">=", EQ: "="}[row.sense]
        out.append(f" {label}: {_lin_str(row.coeffs, names)} {op} {row.rhs:.17g}")
    out.append("Bounds")
    for v, nm in zip(program.variables, names):
        lo = "-inf" if np.isinf(v.lb) else f"{v.lb:.17g}"
        hi = "+inf" if np.isinf(v.ub) else f"{v.ub:.17g}"
        out.append(f" {lo} <= {nm} <= {hi}")
    integers = [nm for v, nm in zip(program.variables, names) if v.integer]
    if integers:
        out.append("General")
        out.append(" " + " ".join(integers))
    out.append("End")
    return "\n".join(out) + "\n"


def _lin_str(coeffs, names) -> str:
    if not coeffs:
        return "0 " + names[0]
    parts = []
    for k, (idx, coeff) in enumerate(coeffs):
        sign = "-" if coeff < 0 else ("+" if k else "")
        parts.append(f"{sign} {abs(coeff):.17g} {names[idx]}".strip())
    return " ".join(parts)
