"""Evaluation of piecewise linear marginal value functions and category assignment.

Also provides the affine rescaling of a model into normalized ("standard")
form, where the worst attainable marginal value per criterion maps to 0 and
the attainable maxima sum to 1.  The rescaling is strictly increasing on
global values, so category assignments are preserved.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import CriterionScale, SortingModel, compute_breakpoints

# Values landing within this distance below a threshold still count as
# reaching it.  Solver-tight solutions put reference alternatives exactly on
# their lower threshold; re-evaluating the model can land an ulp below.
BOUNDARY_TOL = 1e-9


class DimensionMismatch(ValueError):
    pass


class ZeroRange(ValueError):
    """All marginal value functions are constant; normalization is undefined."""


def marginal_value(scale: CriterionScale, values: Sequence[float], x: float) -> float:
    """Interpolate the marginal value of performance level x.

    x is clamped into the scale range; at a breakpoint the stored value is
    returned exactly (no interpolation rounding).
    """
    x = scale.clamp(x)
    bp = scale.breakpoints
    if x <= bp[0]:
        return float(values[0])
    if x >= bp[-1]:
        return float(values[-1])
    k = int(np.searchsorted(bp, x, side="right")) - 1
    if x == bp[k]:
        return float(values[k])
    theta = (x - bp[k]) / (bp[k + 1] - bp[k])
    return float(values[k] + theta * (values[k + 1] - values[k]))


def interpolation_weights(scale: CriterionScale, x: float) -> tuple[tuple[int, float], ...]:
    """Breakpoint weights expressing marginal_value(x) as a linear combination.

    Returns at most two (breakpoint index, coefficient) pairs with
    coefficients (1-theta, theta) summing to 1; a single pair with
    coefficient 1.0 when x sits on a breakpoint.
    """
    x = scale.clamp(x)
    bp = scale.breakpoints
    if x <= bp[0]:
        return ((0, 1.0),)
    if x >= bp[-1]:
        return ((scale.s, 1.0),)
    k = int(np.searchsorted(bp, x, side="right")) - 1
    if x == bp[k]:
        return ((k, 1.0),)
    theta = (x - bp[k]) / (bp[k + 1] - bp[k])
    return ((k, 1.0 - theta), (k + 1, theta))


def global_value(model, row: Sequence[float]) -> float:
    """Sum of per-criterion marginal values for one performance row.

    Works for any model-like object with `criteria` and `marginals`.
    """
    row = np.asarray(row, dtype=float)
    if row.shape != (len(model.criteria),):
        raise DimensionMismatch(
            f"row has {row.shape} entries for {len(model.criteria)} criteria"
        )
    return float(
        sum(
            marginal_value(scale, vals, x)
            for scale, vals, x in zip(model.criteria, model.marginals, row)
        )
    )


def assign_value(
    value: float,
    lower: float,
    interior: np.ndarray,
    upper: float,
    *,
    tol: float = BOUNDARY_TOL,
) -> int:
    """Category of a global value: the h with b_{h-1} <= value < b_h.

    Values at a threshold go up (left-closed intervals); values below the
    lower outer threshold clamp to 1 and values at or above the upper one
    clamp to q.
    """
    q = len(interior) + 1
    if value + tol >= upper:
        return q
    return 1 + int(np.searchsorted(np.asarray(interior), value + tol, side="right"))


def assign_category(model, value: float, *, tol: float = BOUNDARY_TOL) -> int:
    return assign_value(value, model.lower, np.asarray(model.interior), model.upper, tol=tol)


def assign_row(model, row: Sequence[float], *, tol: float = BOUNDARY_TOL) -> int:
    return assign_category(model, global_value(model, row), tol=tol)


def assign_matrix(model, matrix: np.ndarray, *, tol: float = BOUNDARY_TOL) -> np.ndarray:
    """Vectorized assignment of every row of a performance matrix."""
    values = np.array([global_value(model, row) for row in np.asarray(matrix, dtype=float)])
    cats = 1 + np.searchsorted(np.asarray(model.interior), values + tol, side="right")
    cats[values + tol >= model.upper] = len(model.interior) + 1
    return cats.astype(int)


def derive_outer_thresholds(
    marginals: Sequence[Sequence[float]], epsilon: float
) -> tuple[float, float]:
    """Outer thresholds from the attainable range of the global value."""
    lo = float(sum(np.min(v) for v in marginals))
    hi = float(sum(np.max(v) for v in marginals)) + float(epsilon)
    return lo, hi


def build_model(
    criteria: Sequence[CriterionScale],
    marginals: Sequence[Sequence[float]],
    interior: Sequence[float],
    epsilon: float,
) -> SortingModel:
    """Assemble a SortingModel, deriving the outer thresholds."""
    marg = tuple(np.asarray(v, dtype=float) for v in marginals)
    lower, upper = derive_outer_thresholds(marg, epsilon)
    return SortingModel(
        criteria=tuple(criteria),
        marginals=marg,
        interior=np.asarray(interior, dtype=float),
        epsilon=float(epsilon),
        lower=lower,
        upper=upper,
    )


@dataclass(frozen=True)
class StandardModel:
    """A sorting model rescaled to normalized form.

    Per criterion the minimum stored marginal value maps to 0 and the
    attainable maxima sum to 1 across criteria; `weights` are the relative
    value ranges.  `thresholds` is the full rescaled vector of length q+1.
    """

    criteria: tuple[CriterionScale, ...]
    marginals: tuple[np.ndarray, ...]
    thresholds: np.ndarray
    epsilon: float
    weights: np.ndarray

    @property
    def q(self) -> int:
        return len(self.thresholds) - 1

    @property
    def lower(self) -> float:
        return float(self.thresholds[0])

    @property
    def interior(self) -> np.ndarray:
        return self.thresholds[1:-1]

    @property
    def upper(self) -> float:
        return float(self.thresholds[-1])


def standardize(model: SortingModel) -> StandardModel:
    """Rescale marginals and thresholds into normalized form.

    Subtracts each criterion's minimum stored value and divides everything
    by the summed value ranges; epsilon is divided by the same denominator.
    When several breakpoints attain a criterion's extreme value the
    smallest-index one is the nominal anchor (the rescaling depends only on
    the attained values, so the choice is observationally irrelevant).
    """
    mins = np.array([float(np.min(v)) for v in model.marginals])
    maxs = np.array([float(np.max(v)) for v in model.marginals])
    denom = float(np.sum(maxs - mins))
    if denom <= 0:
        raise ZeroRange("all marginal value functions are constant")
    marginals = tuple((np.asarray(v, dtype=float) - mn) / denom for v, mn in zip(model.marginals, mins))
    shift = float(np.sum(mins))
    thresholds = (model.thresholds() - shift) / denom
    return StandardModel(
        criteria=model.criteria,
        marginals=marginals,
        thresholds=thresholds,
        epsilon=model.epsilon / denom,
        weights=(maxs - mins) / denom,
    )


def identity_scale_model(thresholds: Sequence[float], epsilon: float) -> SortingModel:
    """Single-criterion model with the identity value function on [0, 1].

    Convenience for toy problems and tests.
    """
    scale = CriterionScale(0.0, 1.0, 1, compute_breakpoints(0.0, 1.0, 1))
    return build_model([scale], [np.array([0.0, 1.0])], thresholds, epsilon)
