import itertools

import numpy as np
import pytest

from helpers import balanced_instance, unit_scales
from mcsort.constraints import NoSlopeVariables, SortingProgram
from mcsort.core import AssignmentExamples, CriterionScale, ProblemInstance
from mcsort.learn import LearnConfig, learn_margin_first
from mcsort.valuefn import global_value, interpolation_weights


def firm_scale():
    return CriterionScale.from_range(0.04, 35.06, 4)


class TestValueExpression:
    def test_exact_breakpoint_single_coefficient(self):
        got = interpolation_weights(firm_scale(), 8.795)
        assert got == ((1, 1.0),)

    def test_midpoint_half_half(self):
        got = dict(interpolation_weights(firm_scale(), 4.4175))
        assert got[0] == pytest.approx(0.5, abs=1e-12)
        assert got[1] == pytest.approx(0.5, abs=1e-12)

    def test_right_endpoint(self):
        assert interpolation_weights(firm_scale(), 35.06) == ((4, 1.0),)

    def test_coefficients_sum_to_one(self):
        rng = np.random.default_rng(0)
        scale = firm_scale()
        for x in rng.uniform(scale.lo - 5, scale.hi + 5, size=200):
            weights = interpolation_weights(scale, x)
            assert sum(c for _, c in weights) == pytest.approx(1.0, abs=1e-12)
            assert all(0.0 <= c <= 1.0 for _, c in weights)
            assert len(weights) <= 2

    def test_program_expr_matches_evaluation(self):
        rng = np.random.default_rng(1)
        scales = (firm_scale(), CriterionScale.from_range(0.0, 10.0, 3))
        prog = SortingProgram(scales, 3, eps=1e-3)
        values = [rng.uniform(0, 1, size=sc.s + 1) for sc in scales]
        flat = {idx: v for row, vals in zip(prog.layout.values, values) for idx, v in zip(row, vals)}
        model = type("M", (), {"criteria": scales, "marginals": values})()
        for _ in range(50):
            row = [rng.uniform(sc.lo, sc.hi) for sc in scales]
            expr = prog.value_expr(row)
            lp_value = sum(coeff * flat[idx] for idx, coeff in expr.items())
            assert lp_value == pytest.approx(global_value(model, row), abs=1e-12)


def count_rows(prog, prefix):
    return sum(1 for row in prog.builder._rows if row.name.startswith(prefix))


class TestExampleRows:
    def make(self, q, cats):
        scales = unit_scales(2)
        matrix = np.tile(np.linspace(0.1, 0.9, len(cats))[:, None], (1, 2))
        examples = AssignmentExamples.from_pairs(enumerate(cats))
        prog = SortingProgram(scales, q, eps=1e-3)
        prog.add_example_rows(matrix, examples)
        return prog

    def test_middle_category_two_rows(self):
        prog = self.make(4, [2])
        assert count_rows(prog, "lo_a") == 1
        assert count_rows(prog, "hi_a") == 1

    def test_top_category_one_row(self):
        prog = self.make(4, [4])
        assert count_rows(prog, "lo_a") == 1
        assert count_rows(prog, "hi_a") == 0

    def test_bottom_category_one_row(self):
        prog = self.make(4, [1])
        assert count_rows(prog, "lo_a") == 0
        assert count_rows(prog, "hi_a") == 1

    def test_two_categories_only_one_sided(self):
        prog = self.make(2, [1, 2, 2])
        assert count_rows(prog, "lo_a") == 2
        assert count_rows(prog, "hi_a") == 1

    @pytest.mark.parametrize("q,expected", [(2, 0), (3, 1), (4, 2), (6, 4)])
    def test_threshold_ordering_counts(self, q, expected):
        prog = SortingProgram(unit_scales(2), q, eps=1e-3)
        prog.add_threshold_ordering()
        assert count_rows(prog, "ord_b") == expected

    def test_random_row_count_formula(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            n = int(rng.integers(1, 8))
            q = int(rng.integers(2, 6))
            m = int(rng.integers(1, 4))
            cats = rng.integers(1, q + 1, size=n)
            scales = unit_scales(m)
            matrix = rng.uniform(0, 1, size=(n, m))
            prog = SortingProgram(scales, q, eps=1e-3)
            prog.add_example_rows(matrix, AssignmentExamples.from_pairs(enumerate(cats.tolist())))
            prog.add_threshold_ordering()
            expected = sum(2 if 2 <= c <= q - 1 else 1 for c in cats) + (q - 2)
            assert prog.builder.num_rows == expected


class TestBounds:
    def test_unit_box_variable_count(self):
        scales = tuple(CriterionScale.from_range(0, 1, 4) for _ in range(3))
        prog = SortingProgram(scales, 4, eps=1e-3)
        v_vars = [v for v in prog.builder._vars if v.name.startswith("v_")]
        assert len(v_vars) == 15
        assert all(v.lb == 0.0 and v.ub == 1.0 for v in v_vars)

    def test_alternate_box(self):
        scales = unit_scales(2)
        prog = SortingProgram(scales, 3, eps=1e-3, value_bounds=(0.0, 10.0))
        v_vars = [v for v in prog.builder._vars if v.name.startswith("v_")]
        assert all(v.ub == 10.0 for v in v_vars)
        b_vars = [v for v in prog.builder._vars if v.name.startswith("b_")]
        assert all(v.ub == 2 * 10.0 + 1.0 for v in b_vars)


class TestSlopeRows:
    def test_counts(self):
        scales = tuple(CriterionScale.from_range(0, 1, 4) for _ in range(3))
        prog = SortingProgram(scales, 4, eps=1e-3)
        groups = prog.add_slope_rows()
        assert sum(len(g) for g in groups) == 9
        assert count_rows(prog, "slope_") == 18

    def test_all_flat_raises(self):
        prog = SortingProgram(unit_scales(3), 4, eps=1e-3)
        with pytest.raises(NoSlopeVariables):
            prog.add_slope_rows()

    def test_linear_function_admits_zero(self):
        # marginal values on a straight line satisfy the rows with gamma = 0
        scale = CriterionScale.from_range(0.0, 2.0, 4)
        prog = SortingProgram((scale,), 2, eps=1e-3)
        prog.add_slope_rows()
        values = {idx: 0.1 + 0.2 * l for l, idx in enumerate(prog.layout.values[0])}
        for idx_group in prog.layout.slope_change:
            for g in idx_group:
                values[g] = 0.0
        prog.builder.set_objective({})
        program = prog.builder.build()
        point = np.zeros(len(program.variables))
        for idx, val in values.items():
            point[idx] = val
        for row in program.rows:
            lhs = sum(c * point[i] for i, c in row.coeffs)
            if row.sense == ">=":
                assert lhs >= row.rhs - 1e-12


class TestReassignmentRows:
    def test_counts_single_example(self):
        scales = unit_scales(2)
        matrix = np.array([[0.5, 0.5]])
        prog = SortingProgram(scales, 4, eps=1e-3)
        prog.add_reassignment_rows(matrix, AssignmentExamples.from_pairs([(0, 2)]))
        assert count_rows(prog, "lo_a0_h") == 3
        assert count_rows(prog, "hi_a0_h") == 3
        assert count_rows(prog, "one_cat_a0") == 1
        assert count_rows(prog, "move_a0") == 1
        flags = [v for v in prog.builder._vars if v.name.startswith("t_")]
        assert len(flags) == 4
        assert all(v.integer and v.lb == 0.0 and v.ub == 1.0 for v in flags)

    def test_big_m_vacuous_when_flag_off(self):
        # with the flag off, the paired rows must hold for any model values
        scales = unit_scales(1)
        matrix = np.array([[0.5]])
        prog = SortingProgram(scales, 3, eps=1e-3)
        prog.add_reassignment_rows(matrix, AssignmentExamples.from_pairs([(0, 1)]))
        prog.builder.set_objective({})
        program = prog.builder.build()
        rng = np.random.default_rng(2)
        for _ in range(50):
            point = np.zeros(len(program.variables))
            for i, var in enumerate(program.variables):
                if var.name.startswith("v_"):
                    point[i] = rng.uniform(0, 1)
                elif var.name.startswith("b_"):
                    point[i] = rng.uniform(0, 2)
            for row in program.rows:
                if "h" not in row.name or not row.name.startswith(("lo_a", "hi_a")):
                    continue
                lhs = sum(c * point[i] for i, c in row.coeffs)
                ok = lhs <= row.rhs + 1e-9 if row.sense == "<=" else lhs >= row.rhs - 1e-9
                assert ok, f"{row.name} not vacuous with all flags at 0"

    def test_feasible_model_forces_unique_flag_pattern(self):
        # brute-force every flag pattern for a fixed feasible model
        scales = unit_scales(1)
        matrix = np.array([[0.2], [0.8]])
        examples = AssignmentExamples.from_pairs([(0, 1), (1, 2)])
        prog = SortingProgram(scales, 2, eps=1e-3)
        prog.add_reassignment_rows(matrix, examples)
        prog.builder.set_objective({})
        program = prog.builder.build()
        # identity marginal, threshold 0.5: alternative 0 in C1, 1 in C2
        fixed = {"v_0_0": 0.0, "v_0_1": 1.0, "b_1": 0.5}
        valid = []
        flag_names = [v.name for v in program.variables if v.name.startswith("t_")]
        for bits in itertools.product([0.0, 1.0], repeat=len(flag_names)):
            point = np.zeros(len(program.variables))
            for i, var in enumerate(program.variables):
                if var.name in fixed:
                    point[i] = fixed[var.name]
            for name, bit in zip(flag_names, bits):
                idx = next(i for i, v in enumerate(program.variables) if v.name == name)
                point[idx] = bit
            # move variables absorb the linkage row; check only flag logic
            ok = True
            for row in program.rows:
                if row.name.startswith("move_"):
                    continue
                lhs = sum(c * point[i] for i, c in row.coeffs)
                if row.sense == "<=" and lhs > row.rhs + 1e-9:
                    ok = False
                elif row.sense == ">=" and lhs < row.rhs - 1e-9:
                    ok = False
                elif row.sense == "==" and abs(lhs - row.rhs) > 1e-9:
                    ok = False
            if ok:
                valid.append(bits)
        assert valid == [(1.0, 0.0, 0.0, 1.0)]


class TestUntransformedSets:
    def test_solution_satisfies_original_constraints(self):
        # a feasible model also satisfies the pre-simplification constraint
        # system in which the derived outer thresholds appear explicitly
        # (examples must cover the extreme categories)
        for seed in (3, 4, 5):
            instance, _ = balanced_instance(seed)
            outcome = learn_margin_first(instance, LearnConfig())
            model = outcome.model
            eps = model.epsilon
            thresholds = model.thresholds()
            cats = [c for _, c in instance.examples]
            assert min(cats) == 1 and max(cats) == instance.q
            for i, cat in instance.examples:
                value = global_value(model, instance.matrix[i])
                assert value >= thresholds[cat - 1] - 1e-9
                assert value <= thresholds[cat] - eps + 1e-9
            for h in range(1, instance.q + 1):
                assert thresholds[h] - thresholds[h - 1] >= eps - 1e-9
