"""Acceptance suite: every criterion at its stated tolerance.

Each test prints one PASS line (run pytest -s to see them); a failed
assertion marks the criterion red.
"""

import time

import numpy as np
import pytest

from helpers import (
    balanced_instance,
    exhaustive_min_moves,
    lattice_consistent,
    random_model,
    random_row,
    tiny_two_class_instance,
)
from mcsort import io as mio
from mcsort.core import AssignmentExamples, ProblemInstance
from mcsort.learn import (
    LearnConfig,
    MARGIN_FIRST,
    UTADIS,
    check_consistency,
    learn_complexity_first,
    learn_margin_first,
    learn_utadis,
    minimum_adjustment,
)
from mcsort.robustness import apa, possible_assignment_sets
from mcsort.simulate import SimulationConfig, generate_dataset, run_comparison
from mcsort.valuefn import assign_category, assign_row, global_value, standardize

CFG = LearnConfig()


def _ok(num, text):
    print(f"\nACCEPTANCE {num}: PASS - {text}")


def test_criterion_1_consistency(firms_instance):
    start = time.perf_counter()
    result = check_consistency(firms_instance, CFG)
    elapsed = time.perf_counter() - start
    assert result.objective <= 1e-8
    assert elapsed < 1.0
    _ok(1, f"illustrative slack optimum {result.objective:.1e} in {elapsed:.3f}s")


def test_criterion_2_complexity_first_objectives(firms_instance):
    start = time.perf_counter()
    outcome = learn_complexity_first(firms_instance, CFG)
    elapsed = time.perf_counter() - start
    assert outcome.gamma_star == pytest.approx(0.000683, abs=1e-4)
    assert outcome.eps_star == pytest.approx(0.001, abs=1e-6)
    assert elapsed < 5.0
    _ok(
        2,
        f"slope-change optimum {outcome.gamma_star:.6f}, "
        f"separation {outcome.eps_star:.6f} in {elapsed:.2f}s",
    )


def test_criterion_3_margin_first_objectives(firms_instance, margin_outcome):
    assert margin_outcome.eps_star == pytest.approx(0.2675, abs=1e-3)
    assert margin_outcome.gamma_star == pytest.approx(0.458, abs=5e-3)
    expected = {1: 4, 2: 2, 8: 3, 9: 2, 11: 1, 16: 3}
    for i, cat in expected.items():
        assert assign_row(margin_outcome.model, firms_instance.matrix[i]) == cat
    _ok(
        3,
        f"separation {margin_outcome.eps_star:.4f}, slope change "
        f"{margin_outcome.gamma_star:.4f}, all six examples reproduced",
    )


def test_criterion_4_transformation(margin_outcome):
    std = standardize(margin_outcome.model)
    assert std.thresholds[1] == pytest.approx(0.4516, abs=5e-4)
    np.testing.assert_allclose(std.weights, [1 / 3, 1 / 3, 1 / 3], atol=1e-3)

    rng = np.random.default_rng(2024)
    checks = 0
    for _ in range(1000):
        model = random_model(rng)
        scaled = standardize(model)
        for _ in range(2):
            row = random_row(rng, model)
            raw = assign_category(model, global_value(model, row))
            after = assign_category(scaled, global_value(scaled, row))
            assert raw == after
            checks += 1
    _ok(4, f"normalized thresholds/weights match; {checks} category invariance checks exact")


def test_criterion_5_robustness(firms_instance):
    sets = possible_assignment_sets(firms_instance, config=CFG)
    assert set(sets) == set(firms_instance.non_reference())
    for cats in sets.values():
        assert cats == (1, 2, 3, 4)
    score = apa(sets, firms_instance.q)
    assert score == 0.0
    _ok(5, "all 14 non-reference firms fully ambiguous, APA exactly 0")


def test_criterion_6_oracle_equivalence():
    rng = np.random.default_rng(42)
    agreements = 0
    for _ in range(200):
        inst = tiny_two_class_instance(rng)
        lp_verdict = check_consistency(inst, CFG).consistent
        assert lp_verdict == lattice_consistent(inst)
        agreements += 1

    rng = np.random.default_rng(11)
    from helpers import unit_scales

    move_checks = 0
    for _ in range(50):
        m = int(rng.integers(1, 3))
        n = int(rng.integers(2, 5))
        q = int(rng.integers(2, 4))
        matrix = rng.integers(0, 2, size=(n, m)).astype(float)
        cats = rng.integers(1, q + 1, size=n)
        inst = ProblemInstance(
            matrix, unit_scales(m), q,
            AssignmentExamples.from_pairs(enumerate(cats.tolist())),
        )
        _, moves = minimum_adjustment(inst, CFG)
        assert moves == exhaustive_min_moves(inst, CFG)
        move_checks += 1
    _ok(
        6,
        f"{agreements}/200 consistency verdicts match the lattice oracle, "
        f"{move_checks}/50 adjustment optima match exhaustive search",
    )


@pytest.fixture(scope="module")
def desk_cells():
    """Baseline Table-8 style cell plus one-factor trend cells."""
    start = time.perf_counter()

    def cell(approaches, **kw):
        cfg = SimulationConfig(
            datasets=10, replications=20, seed=7, approaches=approaches, **kw
        )
        return run_comparison(cfg)

    base_kw = dict(n=200, m=6, q=4, s=2, r=0.8)
    reports = {
        "base": cell((MARGIN_FIRST, UTADIS), **base_kw),
        "n100": cell((MARGIN_FIRST,), **{**base_kw, "n": 100}),
        "r05": cell((MARGIN_FIRST,), **{**base_kw, "r": 0.5}),
        "m8": cell((MARGIN_FIRST,), **{**base_kw, "m": 8}),
        "q2": cell((MARGIN_FIRST,), **{**base_kw, "q": 2}),
        "s1": cell((MARGIN_FIRST,), **{**base_kw, "s": 1}),
    }
    return reports, time.perf_counter() - start


def test_criterion_7_desk_scale_accuracy(desk_cells):
    reports, elapsed = desk_cells
    base = reports["base"]
    margin = base.approach(MARGIN_FIRST)
    baseline = base.approach(UTADIS)
    assert 0.92 <= margin.mean <= 0.97
    wins = sum(a >= b for a, b in zip(margin.dataset_means, baseline.dataset_means))
    assert wins >= 9

    def mean(tag):
        return reports[tag].approach(MARGIN_FIRST).mean

    assert mean("n100") < margin.mean      # accuracy grows with n
    assert mean("r05") < margin.mean       # accuracy grows with r
    assert mean("m8") < margin.mean        # accuracy falls with m
    assert mean("q2") > margin.mean        # accuracy falls with q
    assert mean("s1") > margin.mean        # accuracy falls with s
    assert elapsed < 1800
    _ok(
        7,
        f"margin-first mean {margin.mean:.4f} (baseline {baseline.mean:.4f}), "
        f"{wins}/10 dataset wins, all five trends ordered, {elapsed:.0f}s total",
    )


def test_criterion_8_property_suite(firms_instance):
    # lexicographic soundness of the two-stage complexity-first learner
    for seed in (51, 52):
        instance, _ = balanced_instance(seed, n=20, m=2, q=3, s=3)
        outcome = learn_complexity_first(instance, CFG)
        total = 0.0
        for scale, values in zip(outcome.model.criteria, outcome.model.marginals):
            slopes = np.diff(values) / np.diff(scale.breakpoints)
            total += float(np.sum(np.abs(np.diff(slopes))))
        assert total <= outcome.gamma_star + CFG.tol_lex + 1e-9

    # value box and threshold ordering for every learner on the firm data
    for learner in (learn_complexity_first, learn_margin_first, learn_utadis):
        model = learner(firms_instance, CFG).model
        for values in model.marginals:
            assert np.all(values >= -1e-7) and np.all(values <= 1 + 1e-7)
        assert np.all(np.diff(model.interior) >= model.epsilon - 1e-7)

    # generated datasets are self-consistent
    for seed in range(3):
        cfg = SimulationConfig(n=30, m=2, q=3, s=2, r=0.5, seed=seed)
        ds = generate_dataset(cfg, 0)
        inst = ProblemInstance(
            ds.matrix, ds.criteria, cfg.q,
            AssignmentExamples.from_pairs(enumerate(ds.truth.tolist())),
        )
        assert check_consistency(inst, CFG).objective <= 1e-8

    # serialization round-trip identity
    rng = np.random.default_rng(8)
    for _ in range(5):
        model = random_model(rng)
        text = mio.emit_model(model)
        assert mio.emit_model(mio.parse_model(text).model) == text

    # seeded determinism of the experiment harness
    cfg = SimulationConfig(n=16, m=2, q=2, s=2, r=0.5, datasets=2, replications=2, seed=5)
    assert run_comparison(cfg) == run_comparison(cfg)

    _ok(8, "lexicographic, box, ordering, self-consistency, round-trip, determinism")
