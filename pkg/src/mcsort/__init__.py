"""Threshold-based multi-criteria sorting with non-monotonic criteria.

Learns piecewise linear additive sorting models from assignment examples by
lexicographic linear programming, repairs inconsistent examples, analyzes
assignment robustness, and benchmarks the learners on synthetic data.
"""

from .core import (
    AssignmentExamples,
    CriterionScale,
    InvalidInstance,
    ProblemInstance,
    SortingModel,
    compute_breakpoints,
    validate,
)
from .learn import (
    APPROACHES,
    COMPLEXITY_FIRST,
    LFP,
    MARGIN_FIRST,
    UTADIS,
    LearnConfig,
    LearnOutcome,
    check_consistency,
    fit,
    minimum_adjustment,
    run_pipeline,
)
from .robustness import apa, possible_assignment_sets, possible_assignments
from .simulate import (
    ExperimentReport,
    SimulationConfig,
    accuracy,
    generate_dataset,
    paired_t_test,
    partition_reference,
    run_comparison,
    run_robustness_experiment,
)
from .valuefn import (
    StandardModel,
    assign_category,
    assign_matrix,
    build_model,
    derive_outer_thresholds,
    global_value,
    marginal_value,
    standardize,
)

__version__ = "0.1.0"
