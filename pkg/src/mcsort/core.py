"""Domain types for threshold-based multi-criteria sorting.

A sorting problem assigns alternatives (rows of a performance matrix) to
ordered categories 1..q, worst to best.  A model consists of one piecewise
linear marginal value function per criterion (values stored at equally
spaced breakpoints) plus a vector of category thresholds on the summed
global value.  Categories are 1-indexed throughout; alternatives 0-indexed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

# violation codes reported by validate()
EMPTY_MATRIX = "empty-matrix"
NON_FINITE_PERFORMANCE = "non-finite-performance"
DEGENERATE_CRITERION = "degenerate-criterion"
MALFORMED_SCALE = "malformed-scale"
DUPLICATE_EXAMPLE = "duplicate-example"
CATEGORY_OUT_OF_RANGE = "category-out-of-range"
UNKNOWN_ALTERNATIVE = "unknown-alternative"
DIMENSION_MISMATCH = "dimension-mismatch"

BREAKPOINT_SPACING_TOL = 1e-12


@dataclass(frozen=True)
class Violation:
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


class InvalidInstance(ValueError):
    """Raised by validate() with the full list of violations."""

    def __init__(self, violations: Sequence[Violation]):
        self.violations = tuple(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


def compute_breakpoints(lo: float, hi: float, s: int) -> np.ndarray:
    """Return s+1 equally spaced breakpoints covering [lo, hi]."""
    if not (np.isfinite(lo) and np.isfinite(hi)) or lo >= hi:
        raise InvalidInstance(
            [Violation(DEGENERATE_CRITERION, f"need lo < hi, got [{lo}, {hi}]")]
        )
    if s < 1:
        raise InvalidInstance(
            [Violation(MALFORMED_SCALE, f"need at least one subinterval, got s={s}")]
        )
    pts = lo + (np.arange(s + 1) / s) * (hi - lo)
    pts[0] = lo
    pts[-1] = hi
    return pts


@dataclass(frozen=True)
class CriterionScale:
    """Performance range of one criterion split into s equal subintervals."""

    lo: float
    hi: float
    s: int
    breakpoints: np.ndarray

    @classmethod
    def from_range(cls, lo: float, hi: float, s: int) -> "CriterionScale":
        return cls(float(lo), float(hi), int(s), compute_breakpoints(lo, hi, s))

    def clamp(self, x: float) -> float:
        """Clip a performance level into [lo, hi]; interpolation is undefined outside."""
        if x < self.lo:
            return self.lo
        if x > self.hi:
            return self.hi
        return float(x)


@dataclass(frozen=True)
class AssignmentExamples:
    """Reference assignments: pairs (alternative index, category in 1..q)."""

    pairs: tuple[tuple[int, int], ...]

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]]) -> "AssignmentExamples":
        return cls(tuple((int(i), int(c)) for i, c in pairs))

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self.pairs)

    def alternatives(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.pairs)

    def as_dict(self) -> dict[int, int]:
        return dict(self.pairs)


@dataclass(frozen=True)
class ProblemInstance:
    """A sorting problem: performance matrix, criterion scales, q, examples."""

    matrix: np.ndarray
    criteria: tuple[CriterionScale, ...]
    q: int
    examples: AssignmentExamples

    @classmethod
    def from_matrix(
        cls,
        matrix: np.ndarray,
        subintervals: int | Sequence[int],
        q: int,
        examples: AssignmentExamples,
    ) -> "ProblemInstance":
        """Build scales from the observed per-criterion min/max of the matrix."""
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.size == 0:
            raise InvalidInstance([Violation(EMPTY_MATRIX, "matrix must be 2-d and nonempty")])
        m = matrix.shape[1]
        if isinstance(subintervals, (int, np.integer)):
            ss = [int(subintervals)] * m
        else:
            ss = [int(v) for v in subintervals]
            if len(ss) != m:
                raise InvalidInstance(
                    [Violation(DIMENSION_MISMATCH, f"{len(ss)} subinterval counts for {m} criteria")]
                )
        criteria = tuple(
            CriterionScale.from_range(matrix[:, j].min(), matrix[:, j].max(), ss[j])
            for j in range(m)
        )
        return validate(cls(matrix, criteria, int(q), examples))

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def m(self) -> int:
        return self.matrix.shape[1]

    def non_reference(self) -> tuple[int, ...]:
        refs = set(self.examples.alternatives())
        return tuple(i for i in range(self.n) if i not in refs)

    def with_examples(self, examples: AssignmentExamples) -> "ProblemInstance":
        return ProblemInstance(self.matrix, self.criteria, self.q, examples)


def check_instance(instance: ProblemInstance) -> list[Violation]:
    """Collect invariant violations; empty list means the instance is valid."""
    out: list[Violation] = []
    mat = instance.matrix
    if mat.ndim != 2 or mat.shape[0] < 1 or mat.shape[1] < 1:
        out.append(Violation(EMPTY_MATRIX, f"matrix shape {mat.shape}"))
        return out
    if not np.all(np.isfinite(mat)):
        bad = np.argwhere(~np.isfinite(mat))[0]
        out.append(
            Violation(NON_FINITE_PERFORMANCE, f"entry ({bad[0]}, {bad[1]}) is not finite")
        )
    if len(instance.criteria) != instance.m:
        out.append(
            Violation(
                DIMENSION_MISMATCH,
                f"{len(instance.criteria)} scales for {instance.m} criteria",
            )
        )
    for j, scale in enumerate(instance.criteria):
        if not (np.isfinite(scale.lo) and np.isfinite(scale.hi)) or scale.lo >= scale.hi:
            out.append(Violation(DEGENERATE_CRITERION, f"criterion {j}: [{scale.lo}, {scale.hi}]"))
            continue
        bp = np.asarray(scale.breakpoints, dtype=float)
        expected = scale.lo + (np.arange(scale.s + 1) / scale.s) * (scale.hi - scale.lo)
        tol = BREAKPOINT_SPACING_TOL * max(1.0, abs(scale.hi - scale.lo))
        if (
            scale.s < 1
            or bp.shape != (scale.s + 1,)
            or bp[0] != scale.lo
            or bp[-1] != scale.hi
            or np.any(np.diff(bp) <= 0)
            or np.max(np.abs(bp - expected)) > tol
        ):
            out.append(Violation(MALFORMED_SCALE, f"criterion {j}: breakpoints not equally spaced"))
    if instance.q < 2:
        out.append(Violation(CATEGORY_OUT_OF_RANGE, f"need q >= 2 categories, got {instance.q}"))
    seen: set[int] = set()
    for i, cat in instance.examples:
        if i in seen:
            out.append(Violation(DUPLICATE_EXAMPLE, f"alternative {i} assigned twice"))
        seen.add(i)
        if not 0 <= i < instance.n:
            out.append(Violation(UNKNOWN_ALTERNATIVE, f"alternative index {i} outside [0, {instance.n})"))
        if not 1 <= cat <= instance.q:
            out.append(Violation(CATEGORY_OUT_OF_RANGE, f"category {cat} outside [1, {instance.q}]"))
    return out


def validate(instance: ProblemInstance) -> ProblemInstance:
    """Return the instance unchanged if valid, else raise InvalidInstance.

    Idempotent: validating a validated instance returns the same object.
    """
    violations = check_instance(instance)
    if violations:
        raise InvalidInstance(violations)
    return instance


@dataclass(frozen=True)
class SortingModel:
    """Learned sorting model: marginal values at breakpoints plus thresholds.

    `interior` holds the q-1 thresholds separating adjacent categories;
    `lower`/`upper` are the outer thresholds derived from the marginal
    value ranges (worst achievable global value, best plus epsilon).
    """

    criteria: tuple[CriterionScale, ...]
    marginals: tuple[np.ndarray, ...]
    interior: np.ndarray
    epsilon: float
    lower: float
    upper: float

    @property
    def q(self) -> int:
        return len(self.interior) + 1

    @property
    def m(self) -> int:
        return len(self.criteria)

    def thresholds(self) -> np.ndarray:
        """Full threshold vector (lower, interior..., upper), length q+1."""
        return np.concatenate(([self.lower], np.asarray(self.interior), [self.upper]))


def check_model(model: SortingModel, tol: float = 1e-7) -> list[Violation]:
    """Invariant check for a sorting model (tolerances absorb solver noise)."""
    out: list[Violation] = []
    if model.epsilon <= 0:
        out.append(Violation(MALFORMED_SCALE, f"epsilon must be positive, got {model.epsilon}"))
    for j, vals in enumerate(model.marginals):
        v = np.asarray(vals)
        if len(v) != model.criteria[j].s + 1:
            out.append(Violation(DIMENSION_MISMATCH, f"criterion {j}: {len(v)} values"))
        if np.any(v < -tol) or np.any(v > 1 + tol):
            out.append(Violation(MALFORMED_SCALE, f"criterion {j}: marginal values outside [0, 1]"))
    b = np.asarray(model.interior)
    if np.any(np.diff(b) < model.epsilon - tol):
        out.append(Violation(MALFORMED_SCALE, "interior thresholds closer than epsilon"))
    if len(b) and (model.lower > b[0] + tol or b[-1] >= model.upper - tol):
        # outer thresholds bracket the interior ones only when the examples
        # covered the extreme categories; flagged, never auto-rejected
        out.append(Violation(MALFORMED_SCALE, "outer thresholds do not bracket interior ones"))
    return out
