"""Constraint-set builders shared by every optimization model in the package.

A SortingProgram owns the variable layout (breakpoint marginal values,
interior category thresholds, the separation parameter, and optional slope
change / slack / reassignment variables) and appends constraint blocks to an
abstract linear program.  Global values of alternatives never get their own
variables; they are substituted as sparse interpolation expressions over the
breakpoint variables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import solver
from .core import AssignmentExamples, CriterionScale, SortingModel
from .solver import EQ, GE, LE, ProgramBuilder, Solution
from .valuefn import build_model, interpolation_weights

# threshold box is [0, m * value_cap + PAD - 1]; big-M adds one more unit so
# it dominates any |V - b| gap without blowing up conditioning
THRESHOLD_PAD = 1.0
BIG_M_PAD = 2.0


class NoSlopeVariables(ValueError):
    """Every criterion has a single subinterval: no slope change exists."""


@dataclass
class VariableLayout:
    """Indices of the model variables inside the underlying program."""

    values: tuple[tuple[int, ...], ...]              # values[j][l]
    thresholds: tuple[int, ...]                      # interior, h = 1..q-1
    eps_var: int | None                              # None when eps is fixed
    eps_value: float                                 # used when eps_var is None
    slope_change: tuple[tuple[int, ...], ...] = ()   # per criterion junctions
    slack: dict[int, tuple[int, int]] = field(default_factory=dict)
    category_flag: dict[int, tuple[int, ...]] = field(default_factory=dict)
    move: dict[int, tuple[int, int]] = field(default_factory=dict)
    scaling: int | None = None


class SortingProgram:
    """One optimization model over the shared sorting-model variable layout.

    eps: a float pins the separation parameter to a constant; an (lb, ub)
    pair makes it a decision variable.
    """

    def __init__(
        self,
        criteria: Sequence[CriterionScale],
        q: int,
        *,
        eps: float | tuple[float, float],
        value_bounds: tuple[float, float | None] = (0.0, 1.0),
        threshold_bounds: tuple[float, float | None] | None = None,
        name: str = "sorting",
    ):
        self.criteria = tuple(criteria)
        self.q = int(q)
        self.value_bounds = value_bounds
        m = len(self.criteria)
        if threshold_bounds is None:
            cap = value_bounds[1] if value_bounds[1] is not None else 1.0
            threshold_bounds = (0.0, m * cap + THRESHOLD_PAD)
        self.threshold_bounds = threshold_bounds
        self.builder = ProgramBuilder(name)
        vb_lo, vb_hi = value_bounds
        values = tuple(
            tuple(
                self.builder.add_variable(
                    f"v_{j}_{l}", vb_lo, np.inf if vb_hi is None else vb_hi
                )
                for l in range(scale.s + 1)
            )
            for j, scale in enumerate(self.criteria)
        )
        tb_lo, tb_hi = threshold_bounds
        thresholds = tuple(
            self.builder.add_variable(f"b_{h}", tb_lo, np.inf if tb_hi is None else tb_hi)
            for h in range(1, self.q)
        )
        if isinstance(eps, tuple):
            eps_var: int | None = self.builder.add_variable("eps", eps[0], eps[1])
            eps_value = float("nan")
        else:
            eps_var = None
            eps_value = float(eps)
        self.layout = VariableLayout(values, thresholds, eps_var, eps_value)

    # -- expressions -------------------------------------------------------

    def value_expr(self, row: Sequence[float]) -> dict[int, float]:
        """Sparse coefficients over breakpoint variables representing V(row)."""
        expr: dict[int, float] = {}
        for j, (scale, x) in enumerate(zip(self.criteria, row)):
            for l, coeff in interpolation_weights(scale, x):
                expr[self.layout.values[j][l]] = coeff
        return expr

    def _threshold(self, h: int) -> int:
        """Variable index of interior threshold h (1-based)."""
        return self.layout.thresholds[h - 1]

    def _add_row_with_eps(
        self, coeffs: dict[int, float], sense: str, rhs: float, eps_coeff: float, name: str
    ) -> None:
        if eps_coeff:
            if self.layout.eps_var is not None:
                coeffs[self.layout.eps_var] = coeffs.get(self.layout.eps_var, 0.0) + eps_coeff
            else:
                rhs -= eps_coeff * self.layout.eps_value
        self.builder.add_row(coeffs, sense, rhs, name)

    # -- constraint blocks --------------------------------------------------

    def add_example_rows(self, matrix: np.ndarray, examples: AssignmentExamples) -> None:
        """Pin each reference alternative between its category thresholds.

        Middle categories get both sides; the bottom category only the upper
        bound (strict by eps) and the top category only the lower bound.
        """
        for i, cat in examples:
            expr = self.value_expr(matrix[i])
            if cat >= 2:
                coeffs = dict(expr)
                coeffs[self._threshold(cat - 1)] = coeffs.get(self._threshold(cat - 1), 0.0) - 1.0
                self.builder.add_row(coeffs, GE, 0.0, f"lo_a{i}")
            if cat <= self.q - 1:
                coeffs = dict(expr)
                coeffs[self._threshold(cat)] = coeffs.get(self._threshold(cat), 0.0) - 1.0
                self._add_row_with_eps(coeffs, LE, 0.0, 1.0, f"hi_a{i}")

    def add_relaxed_example_rows(self, matrix: np.ndarray, examples: AssignmentExamples) -> None:
        """Example rows softened by nonnegative slack pairs per alternative."""
        for i, cat in examples:
            dplus = self.builder.add_variable(f"dplus_{i}", 0.0, np.inf)
            dminus = self.builder.add_variable(f"dminus_{i}", 0.0, np.inf)
            self.layout.slack[i] = (dplus, dminus)
            expr = self.value_expr(matrix[i])
            if cat >= 2:
                coeffs = dict(expr)
                coeffs[self._threshold(cat - 1)] = coeffs.get(self._threshold(cat - 1), 0.0) - 1.0
                coeffs[dplus] = 1.0
                self.builder.add_row(coeffs, GE, 0.0, f"lo_a{i}")
            if cat <= self.q - 1:
                coeffs = dict(expr)
                coeffs[self._threshold(cat)] = coeffs.get(self._threshold(cat), 0.0) - 1.0
                coeffs[dminus] = -1.0
                self._add_row_with_eps(coeffs, LE, 0.0, 1.0, f"hi_a{i}")

    def add_threshold_ordering(self) -> None:
        """Adjacent interior thresholds separated by at least eps (q-2 rows)."""
        for h in range(2, self.q):
            coeffs = {self._threshold(h): 1.0, self._threshold(h - 1): -1.0}
            self._add_row_with_eps(coeffs, GE, 0.0, -1.0, f"ord_b{h}")

    def add_slope_rows(self) -> tuple[tuple[int, ...], ...]:
        """Linearize per-junction absolute slope changes of the value functions.

        Creates one nonnegative variable per interior breakpoint bounding the
        slope difference of the two adjacent subintervals from both sides.
        Raises NoSlopeVariables when every criterion has a single subinterval.
        """
        if all(scale.s < 2 for scale in self.criteria):
            raise NoSlopeVariables("all criteria have s=1; no slope-change variables exist")
        slope_change = []
        for j, scale in enumerate(self.criteria):
            bp = scale.breakpoints
            v = self.layout.values[j]
            indices = []
            for k in range(1, scale.s):
                g = self.builder.add_variable(f"g_{j}_{k}", 0.0, np.inf)
                indices.append(g)
                wl = bp[k] - bp[k - 1]
                wr = bp[k + 1] - bp[k]
                # slope difference (v[k]-v[k-1])/wl - (v[k+1]-v[k])/wr
                diff = {v[k - 1]: -1.0 / wl, v[k]: 1.0 / wl + 1.0 / wr, v[k + 1]: -1.0 / wr}
                plus = {g: 1.0}
                minus = {g: 1.0}
                for idx, coeff in diff.items():
                    plus[idx] = -coeff
                    minus[idx] = coeff
                self.builder.add_row(plus, GE, 0.0, f"slope_p_{j}_{k}")
                self.builder.add_row(minus, GE, 0.0, f"slope_m_{j}_{k}")
            slope_change.append(tuple(indices))
        self.layout.slope_change = tuple(slope_change)
        return self.layout.slope_change

    def add_reassignment_rows(
        self, matrix: np.ndarray, examples: AssignmentExamples, big_m: float | None = None
    ) -> None:
        """Big-M category selection: each example picks exactly one category.

        Binary flags t[h][i] activate the threshold rows of category h; the
        move variables (p, n) linearize |adjusted - original| category steps.
        """
        if big_m is None:
            cap = self.value_bounds[1] if self.value_bounds[1] is not None else 1.0
            big_m = len(self.criteria) * cap + BIG_M_PAD
        for i, cat in examples:
            flags = tuple(
                self.builder.add_variable(f"t_{h}_{i}", 0.0, 1.0, integer=True)
                for h in range(1, self.q + 1)
            )
            self.layout.category_flag[i] = flags
            expr = self.value_expr(matrix[i])
            for h in range(2, self.q + 1):
                coeffs = dict(expr)
                coeffs[self._threshold(h - 1)] = coeffs.get(self._threshold(h - 1), 0.0) - 1.0
                coeffs[flags[h - 1]] = -big_m
                self.builder.add_row(coeffs, GE, -big_m, f"lo_a{i}_h{h}")
            for h in range(1, self.q):
                coeffs = dict(expr)
                coeffs[self._threshold(h)] = coeffs.get(self._threshold(h), 0.0) - 1.0
                coeffs[flags[h - 1]] = big_m
                self._add_row_with_eps(coeffs, LE, big_m, 1.0, f"hi_a{i}_h{h}")
            self.builder.add_row({f: 1.0 for f in flags}, EQ, 1.0, f"one_cat_a{i}")
            p = self.builder.add_variable(f"p_{i}", 0.0, np.inf)
            n = self.builder.add_variable(f"n_{i}", 0.0, np.inf)
            self.layout.move[i] = (p, n)
            # adjusted category minus original equals p - n
            coeffs = {flags[h - 1]: float(h) for h in range(1, self.q + 1)}
            coeffs[p] = -1.0
            coeffs[n] = 1.0
            self.builder.add_row(coeffs, EQ, float(cat), f"move_a{i}")

    def add_scaling_variable(self) -> int:
        """Homogenizing variable for the fractional-programming reformulation.

        Every constant bound becomes proportional to the new variable: the
        breakpoint-value box upper bound and the threshold box upper bound
        turn into rows against it.  Requires lower bounds of zero.
        """
        if self.value_bounds[0] != 0.0 or self.threshold_bounds[0] != 0.0:
            raise ValueError("scaling requires zero lower bounds")
        t = self.builder.add_variable("scale_t", 0.0, np.inf)
        self.layout.scaling = t
        cap = 1.0  # scaled box: v <= cap * t
        for j, row in enumerate(self.layout.values):
            for l, idx in enumerate(row):
                self.builder.add_row({idx: 1.0, t: -cap}, LE, 0.0, f"box_{j}_{l}")
        m = len(self.criteria)
        tcap = m * cap + THRESHOLD_PAD
        for h, idx in enumerate(self.layout.thresholds, start=1):
            self.builder.add_row({idx: 1.0, t: -tcap}, LE, 0.0, f"tbox_{h}")
        return t

    # -- objectives and extraction ------------------------------------------

    def slope_sum(self) -> dict[int, float]:
        return {idx: 1.0 for group in self.layout.slope_change for idx in group}

    def slack_sum(self) -> dict[int, float]:
        return {idx: 1.0 for pair in self.layout.slack.values() for idx in pair}

    def move_sum(self) -> dict[int, float]:
        return {idx: 1.0 for pair in self.layout.move.values() for idx in pair}

    def eps_objective(self) -> dict[int, float]:
        if self.layout.eps_var is None:
            raise ValueError("eps is fixed in this program")
        return {self.layout.eps_var: 1.0}

    def solve(
        self,
        objective: Mapping[int, float],
        *,
        maximize: bool = False,
        algorithm: str = solver.SIMPLEX,
    ) -> Solution:
        self.builder.set_objective(objective, maximize=maximize)
        self.program = self.builder.build()
        return solver.solve(self.program, algorithm=algorithm)

    def extract_model(self, solution: Solution, *, eps: float | None = None) -> SortingModel:
        """Read the sorting model out of an optimal solution.

        eps overrides the recorded separation value (used when a later stage
        re-fixes it); defaults to the eps variable value or the fixed value.
        """
        marginals = [
            np.array([solution.value(idx) for idx in row]) for row in self.layout.values
        ]
        interior = np.array([solution.value(idx) for idx in self.layout.thresholds])
        if eps is None:
            eps = (
                solution.value(self.layout.eps_var)
                if self.layout.eps_var is not None
                else self.layout.eps_value
            )
        return build_model(self.criteria, marginals, interior, eps)
