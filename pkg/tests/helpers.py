"""Shared generators and independent oracles for the test suite."""

from __future__ import annotations

import itertools

import numpy as np

from mcsort.core import AssignmentExamples, CriterionScale, ProblemInstance
from mcsort.learn import LearnConfig, check_consistency
from mcsort.simulate import SimulationConfig, generate_dataset
from mcsort.valuefn import build_model


def random_model(rng, m=None, q=None, max_s=4):
    """Random piecewise linear model with sorted interior thresholds."""
    m = m or int(rng.integers(1, 4))
    q = q or int(rng.integers(2, 5))
    scales = []
    marginals = []
    for _ in range(m):
        lo = float(rng.uniform(-50, 50))
        hi = lo + float(rng.uniform(0.5, 100))
        s = int(rng.integers(1, max_s + 1))
        scales.append(CriterionScale.from_range(lo, hi, s))
        marginals.append(rng.uniform(0, 1, size=s + 1))
    if sum(v.max() - v.min() for v in marginals) <= 0:
        marginals[0][0] = 0.0
        marginals[0][-1] = 1.0
    eps = float(rng.uniform(1e-3, 0.3))
    b0 = sum(float(v.min()) for v in marginals)
    span = sum(float(v.max() - v.min()) for v in marginals)
    interior = np.sort(rng.uniform(b0, b0 + span, size=q - 1))
    return build_model(scales, marginals, interior, eps)


def random_row(rng, model):
    return np.array([rng.uniform(sc.lo, sc.hi) for sc in model.criteria])


def balanced_instance(rng_seed, *, n=24, m=2, q=3, s=2, extra=()):
    """Small consistent instance with every category populated.

    References are a random subset forced to cover the extreme categories.
    """
    cfg = SimulationConfig(
        n=n, m=m, q=q, s=s, r=0.5, seed=int(rng_seed), balanced=True, datasets=1
    )
    ds = generate_dataset(cfg, 0)
    rng = np.random.default_rng(int(rng_seed) + 1)
    refs = set(int(i) for i in rng.choice(n, size=max(4, n // 2), replace=False))
    refs.add(int(np.argmin(ds.truth)))
    refs.add(int(np.argmax(ds.truth)))
    examples = AssignmentExamples.from_pairs((i, int(ds.truth[i])) for i in sorted(refs))
    return ProblemInstance(ds.matrix, ds.criteria, q, examples), ds


def tiny_two_class_instance(rng):
    """Random q=2, s=1 instance with performances on breakpoints.

    Labels come from a lattice model, then are flipped with probability 2/3
    so both consistent and inconsistent instances occur.
    """
    m = int(rng.integers(1, 3))
    n = int(rng.integers(2, 7))
    scales = tuple(CriterionScale.from_range(0.0, 1.0, 1) for _ in range(m))
    matrix = rng.integers(0, 2, size=(n, m)).astype(float)
    v = rng.integers(0, 21, size=2 * m) / 20.0
    b1 = rng.integers(0, 21) / 20.0 * (m + 1)
    values = matrix @ np.array([[v[2 * j + 1] - v[2 * j]] for j in range(m)]).ravel() + sum(
        v[2 * j] for j in range(m)
    )
    cats = np.where(values < b1, 1, 2)
    if rng.random() < 0.67:
        k = int(rng.integers(0, n))
        cats[k] = 3 - cats[k]
    examples = AssignmentExamples.from_pairs(enumerate(cats.tolist()))
    return ProblemInstance(matrix, scales, 2, examples)


def lattice_consistent(instance, eps=1e-3, points=21):
    """Brute-force consistency verdict for q=2, s=1 instances.

    Enumerates every marginal breakpoint value on a uniform lattice and
    checks whether some lattice threshold separates the two classes with
    margin eps (thresholds live on their own lattice over [0, m+1]).
    """
    m = instance.m
    grid = np.linspace(0.0, 1.0, points)
    b_hi = m + 1.0
    b_step = b_hi / (points - 1)
    rows, cats = [], []
    for i, cat in instance.examples:
        coeff = np.zeros(2 * m)
        for j, scale in enumerate(instance.criteria):
            theta = (instance.matrix[i, j] - scale.lo) / (scale.hi - scale.lo)
            coeff[2 * j] = 1.0 - theta
            coeff[2 * j + 1] = theta
        rows.append(coeff)
        cats.append(cat)
    coeffs = np.array(rows)
    cats = np.array(cats)
    combos = np.array(list(itertools.product(grid, repeat=2 * m)))
    values = combos @ coeffs.T
    low = cats == 1
    high = cats == 2
    vmax1 = values[:, low].max(axis=1) if low.any() else np.full(len(values), -np.inf)
    vmin2 = values[:, high].min(axis=1) if high.any() else np.full(len(values), np.inf)
    candidate = np.ceil(np.maximum(vmax1 + eps, 0.0) / b_step - 1e-12) * b_step
    ok = (candidate <= vmin2 + 1e-12) & (candidate <= b_hi + 1e-12)
    return bool(ok.any())


def exhaustive_min_moves(instance, config=LearnConfig()):
    """Minimal total category moves over all consistent joint reassignments."""
    indices = [i for i, _ in instance.examples]
    original = [c for _, c in instance.examples]
    best = None
    for combo in itertools.product(range(1, instance.q + 1), repeat=len(indices)):
        trial = AssignmentExamples.from_pairs(zip(indices, combo))
        if check_consistency(instance.with_examples(trial), config).consistent:
            moves = sum(abs(a - b) for a, b in zip(combo, original))
            best = moves if best is None else min(best, moves)
    return best


def unit_scales(m):
    return tuple(CriterionScale.from_range(0.0, 1.0, 1) for _ in range(m))
