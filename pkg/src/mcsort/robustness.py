"""Possible-assignment analysis of non-reference alternatives.

A category is *possible* for an alternative when at least one sorting model
compatible with the assignment examples puts the alternative there.  The
test appends the tentative assignment to the examples and maximizes the
separation parameter: the category counts iff the optimum is positive.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence

import numpy as np

from .constraints import SortingProgram
from .core import AssignmentExamples, ProblemInstance
from .learn import LearnConfig
from .solver import Status


def possible_assignments(
    instance: ProblemInstance,
    alternative: int,
    config: LearnConfig = LearnConfig(),
) -> tuple[int, ...]:
    """Categories some example-compatible model assigns the alternative to.

    The separation variable starts at zero (no floor) so that barely
    compatible categories are judged by the tau cutoff, not by a bound;
    an infeasible program simply excludes the category.
    """
    if alternative in instance.examples.alternatives():
        raise ValueError(f"alternative {alternative} is a reference alternative")
    out = []
    for cat in range(1, instance.q + 1):
        trial = AssignmentExamples.from_pairs(
            list(instance.examples.pairs) + [(alternative, cat)]
        )
        prog = SortingProgram(
            instance.criteria,
            instance.q,
            eps=(0.0, config.cap(instance.m)),
            value_bounds=config.value_bounds,
            name=f"possible_a{alternative}_c{cat}",
        )
        prog.add_example_rows(instance.matrix, trial)
        prog.add_threshold_ordering()
        solution = prog.solve(prog.eps_objective(), maximize=True)
        if solution.status is Status.OPTIMAL and solution.objective > config.tau:
            out.append(cat)
    return tuple(out)


def possible_assignment_sets(
    instance: ProblemInstance,
    alternatives: Sequence[int] | None = None,
    config: LearnConfig = LearnConfig(),
) -> dict[int, tuple[int, ...]]:
    """Possible-assignment sets for the given (default: all non-reference) alternatives."""
    if alternatives is None:
        alternatives = instance.non_reference()
    return {i: possible_assignments(instance, i, config) for i in alternatives}


def apa(sets: Mapping[int, Sequence[int]] | Iterable[Sequence[int]], q: int) -> float:
    """Normalized average possible-assignment score in [0, 1].

    1 means every alternative has a single possible category (maximum
    robustness); 0 means every category is possible for everyone.
    """
    if q < 2:
        raise ValueError("need at least two categories")
    collections = list(sets.values()) if isinstance(sets, Mapping) else list(sets)
    if not collections:
        raise ValueError("no possible-assignment sets given")
    sizes = np.array([len(c) for c in collections], dtype=float)
    if np.any(sizes == 0):
        raise ValueError("empty possible-assignment set")
    return float(1.0 - np.mean((sizes - 1.0) / (q - 1.0)))
