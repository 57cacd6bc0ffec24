"""Learners that fit a representative sorting model to assignment examples.

Four learners share the same constraint machinery:

* ``complexity-first``: lexicographic, minimizes total slope change of the
  marginal value functions first, then maximizes the separation parameter.
* ``margin-first``: lexicographic, maximizes the separation parameter first,
  then minimizes total slope change at that separation.
* ``lfp``: minimizes the ratio slope-change/separation as a single linear
  fractional program (solved through a homogenizing change of variables).
* ``utadis``: the classic disaggregation baseline; keeps the slack-minimal
  model of the consistency check at a fixed small separation.

An inconsistent example set is repaired beforehand by a minimum-adjustment
MILP that moves as few examples as possible to other categories.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .constraints import NoSlopeVariables, SortingProgram
from .core import AssignmentExamples, ProblemInstance, SortingModel, validate
from .solver import INTERIOR_POINT, Solution, Status, write_lp
from .valuefn import assign_matrix, build_model

COMPLEXITY_FIRST = "complexity-first"
MARGIN_FIRST = "margin-first"
LFP = "lfp"
UTADIS = "utadis"
APPROACHES = (COMPLEXITY_FIRST, MARGIN_FIRST, LFP, UTADIS)

CONSISTENT_TOL = 1e-8


class InfeasibleExamples(RuntimeError):
    """A learner hit an infeasible program: the examples were not consistent."""


class DegenerateScaling(RuntimeError):
    """The fractional program drove the homogenizing variable to zero."""


@dataclass(frozen=True)
class LearnConfig:
    """Knobs shared by all learners.

    eps_fixed is the conventional fixed separation used by the consistency
    check, the adjustment MILP and the utadis baseline, and is the lower
    bound of the separation variable in the complexity-first stages.
    eps_cap defaults to the number of criteria (the global value can never
    exceed it under the unit value box).
    """

    approach: str = MARGIN_FIRST
    eps_fixed: float = 1e-3
    eps_floor: float = 1e-6
    eps_cap: float | None = None
    tol_lex: float = 1e-7
    value_bounds: tuple[float, float] = (0.0, 1.0)
    tau: float = 1e-6
    dump_dir: str | None = None

    def __post_init__(self):
        if not 0 < self.eps_floor <= self.eps_fixed:
            raise ValueError("need 0 < eps_floor <= eps_fixed")
        if self.eps_cap is not None and self.eps_fixed > self.eps_cap:
            raise ValueError("eps_fixed exceeds eps_cap")

    def cap(self, m: int) -> float:
        return self.eps_cap if self.eps_cap is not None else float(m) * self.value_bounds[1]


@dataclass(frozen=True)
class ConsistencyResult:
    """Outcome of the slack-relaxation check (objective 0 means consistent)."""

    objective: float
    slacks: dict[int, tuple[float, float]]
    model: SortingModel

    @property
    def consistent(self) -> bool:
        return self.objective <= CONSISTENT_TOL


@dataclass(frozen=True)
class LearnOutcome:
    model: SortingModel
    gamma_star: float | None
    eps_star: float
    examples: AssignmentExamples
    consistency_slack: float | None = None
    log: tuple[str, ...] = ()


def _dump(config: LearnConfig, program, tag: str) -> None:
    if config.dump_dir:
        os.makedirs(config.dump_dir, exist_ok=True)
        path = os.path.join(config.dump_dir, f"{tag}.lp")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(write_lp(program))


def _require_optimal(solution: Solution, what: str) -> Solution:
    if solution.status is Status.INFEASIBLE:
        raise InfeasibleExamples(f"{what} is infeasible; examples are not consistent")
    if solution.status is not Status.OPTIMAL:
        raise InfeasibleExamples(f"{what} ended with status {solution.status.value}")
    return solution


def check_consistency(
    instance: ProblemInstance, config: LearnConfig = LearnConfig()
) -> ConsistencyResult:
    """Minimize total example slack at the fixed separation.

    Always feasible (the slacks absorb everything); an objective of zero
    certifies that some model reproduces every example.
    """
    prog = SortingProgram(
        instance.criteria,
        instance.q,
        eps=config.eps_fixed,
        value_bounds=config.value_bounds,
        name="consistency",
    )
    prog.add_relaxed_example_rows(instance.matrix, instance.examples)
    prog.add_threshold_ordering()
    # the slack optimum is unique but the fitted model is not: keep the
    # barrier point of the optimal face rather than an extreme vertex
    solution = prog.solve(prog.slack_sum(), algorithm=INTERIOR_POINT)
    _dump(config, prog.program, "consistency")
    if solution.status is not Status.OPTIMAL:
        raise InfeasibleExamples(
            f"slack relaxation ended {solution.status.value}: builder bug"
        )
    slacks = {
        i: (solution.value(dp), solution.value(dn))
        for i, (dp, dn) in prog.layout.slack.items()
    }
    return ConsistencyResult(
        objective=float(solution.objective),
        slacks=slacks,
        model=prog.extract_model(solution),
    )


def minimum_adjustment(
    instance: ProblemInstance, config: LearnConfig = LearnConfig()
) -> tuple[AssignmentExamples, int]:
    """Move the fewest category steps needed to make the examples consistent.

    Returns the adjusted examples and the total number of steps moved.
    """
    prog = SortingProgram(
        instance.criteria,
        instance.q,
        eps=config.eps_fixed,
        value_bounds=config.value_bounds,
        name="adjustment",
    )
    prog.add_reassignment_rows(instance.matrix, instance.examples)
    prog.add_threshold_ordering()
    solution = prog.solve(prog.move_sum())
    _dump(config, prog.program, "adjustment")
    _require_optimal(solution, "adjustment MILP")
    adjusted = []
    for i, _ in instance.examples:
        flags = prog.layout.category_flag[i]
        cat = 1 + int(np.argmax([solution.value(f) for f in flags]))
        adjusted.append((i, cat))
    moves = int(round(solution.objective))
    return AssignmentExamples.from_pairs(adjusted), moves


def learn_complexity_first(
    instance: ProblemInstance, config: LearnConfig = LearnConfig()
) -> LearnOutcome:
    """Minimize total slope change, then maximize separation at that optimum.

    The separation is a variable bounded below by eps_fixed in both stages;
    stage two keeps the slope-change sum within tol_lex of the stage-one
    optimum.  Requires at least one criterion with several subintervals.
    """
    eps_bounds = (config.eps_fixed, config.cap(instance.m))

    stage1 = SortingProgram(
        instance.criteria,
        instance.q,
        eps=eps_bounds,
        value_bounds=config.value_bounds,
        name="complexity_stage1",
    )
    stage1.add_example_rows(instance.matrix, instance.examples)
    stage1.add_threshold_ordering()
    stage1.add_slope_rows()
    sol1 = stage1.solve(stage1.slope_sum())
    _dump(config, stage1.program, "complexity_stage1")
    _require_optimal(sol1, "slope-change stage")
    gamma_star = float(sol1.objective)

    stage2 = SortingProgram(
        instance.criteria,
        instance.q,
        eps=eps_bounds,
        value_bounds=config.value_bounds,
        name="complexity_stage2",
    )
    stage2.add_example_rows(instance.matrix, instance.examples)
    stage2.add_threshold_ordering()
    stage2.add_slope_rows()
    stage2.builder.add_row(stage2.slope_sum(), "<=", gamma_star + config.tol_lex, "lex_slope")
    sol2 = stage2.solve(stage2.eps_objective(), maximize=True)
    _dump(config, stage2.program, "complexity_stage2")
    _require_optimal(sol2, "separation stage")
    eps_star = float(sol2.objective)
    return LearnOutcome(
        model=stage2.extract_model(sol2),
        gamma_star=gamma_star,
        eps_star=eps_star,
        examples=instance.examples,
        log=(f"slope change optimum {gamma_star:.9g}", f"separation {eps_star:.9g}"),
    )


def learn_margin_first(
    instance: ProblemInstance, config: LearnConfig = LearnConfig()
) -> LearnOutcome:
    """Maximize separation, then minimize slope change at that separation.

    With single-subinterval criteria the second stage is skipped (there is
    no slope change to minimize) and the first-stage model is returned.
    """
    stage1 = SortingProgram(
        instance.criteria,
        instance.q,
        eps=(config.eps_floor, config.cap(instance.m)),
        value_bounds=config.value_bounds,
        name="margin_stage1",
    )
    stage1.add_example_rows(instance.matrix, instance.examples)
    stage1.add_threshold_ordering()
    sol1 = stage1.solve(stage1.eps_objective(), maximize=True)
    _dump(config, stage1.program, "margin_stage1")
    _require_optimal(sol1, "separation stage")
    eps_star = float(sol1.objective)

    if all(scale.s < 2 for scale in instance.criteria):
        return LearnOutcome(
            model=stage1.extract_model(sol1, eps=eps_star),
            gamma_star=0.0,
            eps_star=eps_star,
            examples=instance.examples,
            log=(f"separation {eps_star:.9g}", "no slope-change stage (all s=1)"),
        )

    stage2 = SortingProgram(
        instance.criteria,
        instance.q,
        eps=eps_star,
        value_bounds=config.value_bounds,
        name="margin_stage2",
    )
    stage2.add_example_rows(instance.matrix, instance.examples)
    stage2.add_threshold_ordering()
    stage2.add_slope_rows()
    sol2 = stage2.solve(stage2.slope_sum())
    _dump(config, stage2.program, "margin_stage2")
    _require_optimal(sol2, "slope-change stage")
    gamma_star = float(sol2.objective)
    return LearnOutcome(
        model=stage2.extract_model(sol2),
        gamma_star=gamma_star,
        eps_star=eps_star,
        examples=instance.examples,
        log=(f"separation {eps_star:.9g}", f"slope change optimum {gamma_star:.9g}"),
    )


def learn_lfp(instance: ProblemInstance, config: LearnConfig = LearnConfig()) -> LearnOutcome:
    """Minimize slope change per unit of separation (linear fractional form).

    Change of variables: every decision variable and every constant bound is
    scaled by a positive homogenizer, the scaled separation is pinned to one,
    and the scaled slope-change sum is minimized; dividing by the optimal
    homogenizer recovers the model.
    """
    prog = SortingProgram(
        instance.criteria,
        instance.q,
        eps=1.0,
        value_bounds=(0.0, None),
        threshold_bounds=(0.0, None),
        name="lfp",
    )
    prog.add_example_rows(instance.matrix, instance.examples)
    prog.add_threshold_ordering()
    prog.add_slope_rows()
    prog.add_scaling_variable()
    solution = prog.solve(prog.slope_sum())
    _dump(config, prog.program, "lfp")
    _require_optimal(solution, "fractional program")
    t = solution.value(prog.layout.scaling)
    if t <= config.tau:
        raise DegenerateScaling(f"homogenizing variable {t:.3g} below {config.tau:.3g}")
    marginals = [
        np.array([solution.value(idx) / t for idx in row]) for row in prog.layout.values
    ]
    interior = np.array([solution.value(idx) / t for idx in prog.layout.thresholds])
    eps_star = 1.0 / t
    model = build_model(instance.criteria, marginals, interior, eps_star)
    ratio = float(solution.objective)
    return LearnOutcome(
        model=model,
        gamma_star=ratio * eps_star,
        eps_star=eps_star,
        examples=instance.examples,
        log=(f"slope-change/separation ratio {ratio:.9g}", f"separation {eps_star:.9g}"),
    )


def learn_utadis(instance: ProblemInstance, config: LearnConfig = LearnConfig()) -> LearnOutcome:
    """Baseline: keep the slack-minimal model at the fixed separation."""
    result = check_consistency(instance, config)
    return LearnOutcome(
        model=result.model,
        gamma_star=None,
        eps_star=config.eps_fixed,
        examples=instance.examples,
        consistency_slack=result.objective,
        log=(f"slack optimum {result.objective:.9g}",),
    )


LEARNERS: dict[str, Callable[[ProblemInstance, LearnConfig], LearnOutcome]] = {
    COMPLEXITY_FIRST: learn_complexity_first,
    MARGIN_FIRST: learn_margin_first,
    LFP: learn_lfp,
    UTADIS: learn_utadis,
}


def fit(instance: ProblemInstance, config: LearnConfig = LearnConfig()) -> LearnOutcome:
    """Run the learner selected by config.approach."""
    try:
        fn = LEARNERS[config.approach]
    except KeyError:
        raise ValueError(f"unknown approach {config.approach!r}; choose from {APPROACHES}")
    return fn(instance, config)


@dataclass(frozen=True)
class PipelineResult:
    outcome: LearnOutcome
    assignments: np.ndarray           # every alternative, categories 1..q
    consistency: ConsistencyResult
    adjusted: bool
    moves: int


def run_pipeline(instance: ProblemInstance, config: LearnConfig = LearnConfig()) -> PipelineResult:
    """End-to-end: consistency check, adjustment if needed, learn, sort.

    The returned assignments cover all alternatives; reference alternatives
    reproduce their (possibly adjusted) example categories.
    """
    instance = validate(instance)
    consistency = check_consistency(instance, config)
    adjusted = not consistency.consistent
    moves = 0
    if adjusted:
        new_examples, moves = minimum_adjustment(instance, config)
        instance = instance.with_examples(new_examples)
    outcome = fit(instance, config)
    outcome = replace(outcome, consistency_slack=consistency.objective)
    assignments = assign_matrix(outcome.model, instance.matrix)
    return PipelineResult(
        outcome=outcome,
        assignments=assignments,
        consistency=consistency,
        adjusted=adjusted,
        moves=moves,
    )
