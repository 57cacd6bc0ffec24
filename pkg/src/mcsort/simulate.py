"""Monte-Carlo experiment harness: dataset generation, accuracy, robustness.

Synthetic sorting problems are drawn from a known ground-truth model, split
into reference and non-reference alternatives, and the learners are scored
by the fraction of non-reference alternatives they re-assign correctly (or
by the possible-assignment score for robustness runs).  A single 64-bit
seed drives a counter-based generator (Philox) with streams split per
dataset and replication, so results do not depend on execution order.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np
from scipy import stats as scipy_stats

from . import learn as learn_mod
from . import robustness as robustness_mod
from .core import AssignmentExamples, CriterionScale, ProblemInstance
from .learn import APPROACHES, LearnConfig, check_consistency
from .valuefn import assign_matrix, marginal_value

MAX_REDRAWS = 100


class DegenerateSample(ValueError):
    """Paired test is undefined: the differences have zero variance."""


@dataclass(frozen=True)
class SimulationConfig:
    """Parameters of one experiment grid cell."""

    n: int = 200
    m: int = 6
    q: int = 4
    s: int | tuple[int, ...] = 2
    r: float = 0.8
    datasets: int = 10
    replications: int = 20
    seed: int = 0
    balanced: bool = False
    approaches: tuple[str, ...] = APPROACHES
    alpha: float = 0.05
    learn: LearnConfig = field(default_factory=LearnConfig)
    jobs: int = 1

    def subintervals(self) -> tuple[int, ...]:
        if isinstance(self.s, (int, np.integer)):
            return (int(self.s),) * self.m
        return tuple(int(v) for v in self.s)

    def __post_init__(self):
        if not 0 < self.r < 1:
            raise ValueError("reference proportion r must be in (0, 1)")
        if int(self.n * self.r) < 1 or self.n - int(self.n * self.r) < 1:
            raise ValueError("partition leaves no reference or no non-reference alternatives")


def stream(seed: int, *path: int) -> np.random.Generator:
    """Independent Philox stream for one (seed, purpose...) path."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class Dataset:
    """A generated problem with its ground truth."""

    matrix: np.ndarray
    criteria: tuple[CriterionScale, ...]
    marginals: tuple[np.ndarray, ...]
    thresholds: np.ndarray              # full vector, length q+1
    truth: np.ndarray                   # category of every alternative


def _draw(config: SimulationConfig, rng: np.random.Generator) -> Dataset | None:
    subs = config.subintervals()
    matrix = rng.uniform(0.0, 100.0, size=(config.n, config.m))
    lows = matrix.min(axis=0)
    highs = matrix.max(axis=0)
    if np.any(highs - lows <= 0):
        return None
    criteria = tuple(
        CriterionScale.from_range(lows[j], highs[j], subs[j]) for j in range(config.m)
    )
    raw = [rng.uniform(0.0, 1.0, size=subs[j] + 1) for j in range(config.m)]
    mins = np.array([v.min() for v in raw])
    maxs = np.array([v.max() for v in raw])
    denom = float(np.sum(maxs - mins))
    if denom <= 0:
        return None
    marginals = tuple((raw[j] - mins[j]) / denom for j in range(config.m))

    # ground-truth global values under the normalized model
    values = np.array(
        [
            sum(marginal_value(sc, vals, x) for sc, vals, x in zip(criteria, marginals, row))
            for row in matrix
        ]
    )

    if config.balanced:
        interior = np.quantile(values, np.arange(1, config.q) / config.q)
        if np.any(np.diff(interior) <= 0):
            return None
    else:
        interior = np.arange(1, config.q) / config.q
    thresholds = np.concatenate(([0.0], interior, [1.0]))
    truth = 1 + np.searchsorted(interior, values, side="right")
    truth[values >= 1.0] = config.q
    if config.balanced:
        counts = np.bincount(truth, minlength=config.q + 1)[1:]
        if counts.max() - counts.min() > 1:
            return None
    return Dataset(matrix, criteria, marginals, thresholds, truth.astype(int))


def generate_dataset(
    config: SimulationConfig, index: int, *, ensure_consistent: bool = True
) -> Dataset:
    """Draw one dataset; redraw on degenerate criteria or ties.

    With ensure_consistent the construction is verified: treating every
    alternative as a reference must give zero slack at the fixed separation
    (tight random margins can occasionally violate this even though the
    data came from a real model).
    """
    for attempt in range(MAX_REDRAWS):
        rng = stream(config.seed, index, 0, attempt)
        ds = _draw(config, rng)
        if ds is None:
            continue
        if ensure_consistent and not _self_consistent(config, ds):
            continue
        return ds
    raise RuntimeError(f"no valid dataset after {MAX_REDRAWS} draws (dataset {index})")


def _self_consistent(config: SimulationConfig, ds: Dataset) -> bool:
    examples = AssignmentExamples.from_pairs(enumerate(ds.truth.tolist()))
    instance = ProblemInstance(ds.matrix, ds.criteria, config.q, examples)
    return check_consistency(instance, config.learn).consistent


def generate_balanced_dataset(config: SimulationConfig, index: int, **kw) -> Dataset:
    return generate_dataset(replace(config, balanced=True), index, **kw)


def partition_reference(
    truth: Sequence[int],
    r: float,
    rng: np.random.Generator,
    *,
    balanced: bool = False,
    q: int | None = None,
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Split alternatives into reference and non-reference sets.

    |reference| = floor(n*r).  Unbalanced: a uniform sample.  Balanced: the
    quota is spread as evenly as the per-category populations allow,
    remainders going to the largest categories.
    """
    truth = np.asarray(truth, dtype=int)
    n = len(truth)
    n_ref = int(n * r)
    if n_ref < 1 or n_ref >= n:
        raise ValueError(f"reference share {r} leaves an empty side (n={n})")
    if not balanced:
        refs = rng.choice(n, size=n_ref, replace=False)
    else:
        q = int(q if q is not None else truth.max())
        groups = [np.flatnonzero(truth == cat) for cat in range(1, q + 1)]
        groups = [g for g in groups if len(g)]
        if n_ref < len(groups):
            raise ValueError(
                f"cannot place a reference in each of {len(groups)} categories with {n_ref} slots"
            )
        quotas = _even_quotas([len(g) for g in groups], n_ref, rng)
        picks = [rng.choice(g, size=k, replace=False) for g, k in zip(groups, quotas)]
        refs = np.concatenate(picks)
    ref_set = set(int(i) for i in refs)
    non = tuple(i for i in range(n) if i not in ref_set)
    return tuple(sorted(ref_set)), non


def _even_quotas(sizes: list[int], total: int, rng: np.random.Generator) -> list[int]:
    """Spread `total` across groups as evenly as their sizes allow.

    Equal fair shares per round (small groups cap at their size); the final
    sub-round remainder goes to uniformly chosen groups.
    """
    if total > sum(sizes):
        raise ValueError("quota exceeds population")
    quotas = [0] * len(sizes)
    remaining = total
    while remaining:
        open_groups = [g for g in range(len(sizes)) if quotas[g] < sizes[g]]
        share = remaining // len(open_groups)
        if share == 0:
            chosen = rng.permutation(open_groups)[:remaining]
            for g in chosen:
                quotas[g] += 1
            break
        for g in open_groups:
            take = min(share, sizes[g] - quotas[g], remaining)
            quotas[g] += take
            remaining -= take
    return quotas


def accuracy(truth: Sequence[int], predicted: Sequence[int]) -> float:
    """Fraction of exact category matches."""
    a = np.asarray(truth)
    b = np.asarray(predicted)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise ValueError("empty comparison")
    return float(np.mean(a == b))


@dataclass(frozen=True)
class TTestResult:
    t: float
    p: float
    reject: bool
    alpha: float


def paired_t_test(a: Sequence[float], b: Sequence[float], alpha: float = 0.05) -> TTestResult:
    """One-tailed paired t-test of mean(a) > mean(b).

    Rejecting the null (mean(a) <= mean(b)) at level alpha requires
    p < alpha; degenerate samples (all differences equal) are refused.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("need two equally long 1-d samples")
    if len(a) < 2:
        raise ValueError("need at least two pairs")
    d = a - b
    if np.ptp(d) == 0.0:
        raise DegenerateSample("differences have zero variance")
    t = float(np.mean(d) / (np.std(d, ddof=1) / np.sqrt(len(d))))
    p = float(scipy_stats.t.sf(t, df=len(d) - 1))
    return TTestResult(t=t, p=p, reject=p < alpha, alpha=alpha)


@dataclass(frozen=True)
class ApproachStats:
    name: str
    available: bool
    dataset_means: tuple[float, ...] = ()
    mean: float | None = None
    std: float | None = None
    failures: int = 0


@dataclass(frozen=True)
class Comparison:
    name_a: str
    name_b: str
    t: float
    p: float
    reject: bool


@dataclass(frozen=True)
class ExperimentReport:
    metric: str
    config: SimulationConfig
    stats: tuple[ApproachStats, ...]
    comparisons: tuple[Comparison, ...] = ()

    def approach(self, name: str) -> ApproachStats:
        for st in self.stats:
            if st.name == name:
                return st
        raise KeyError(name)


def _replication_accuracy(
    config: SimulationConfig, ds: Dataset, dataset_index: int, rep: int
) -> dict[str, float | None]:
    rng = stream(config.seed, dataset_index, 1, rep)
    refs, non = partition_reference(
        ds.truth, config.r, rng, balanced=config.balanced, q=config.q
    )
    examples = AssignmentExamples.from_pairs((i, int(ds.truth[i])) for i in refs)
    instance = ProblemInstance(ds.matrix, ds.criteria, config.q, examples)
    flat = all(scale.s < 2 for scale in ds.criteria)
    out: dict[str, float | None] = {}
    for name in config.approaches:
        if flat and name in (learn_mod.COMPLEXITY_FIRST, learn_mod.LFP):
            out[name] = None
            continue
        try:
            outcome = learn_mod.LEARNERS[name](instance, config.learn)
            predicted = assign_matrix(outcome.model, ds.matrix[list(non)])
            out[name] = accuracy(ds.truth[list(non)], predicted)
        except (learn_mod.InfeasibleExamples, learn_mod.DegenerateScaling):
            out[name] = None
    return out


def _dataset_accuracy(
    config: SimulationConfig, dataset_index: int
) -> dict[str, tuple[float | None, int]]:
    """Mean accuracy per approach over the replications of one dataset."""
    ds = generate_dataset(config, dataset_index)
    cells: dict[str, list[float]] = {name: [] for name in config.approaches}
    failures: dict[str, int] = {name: 0 for name in config.approaches}
    for rep in range(config.replications):
        scores = _replication_accuracy(config, ds, dataset_index, rep)
        for name, score in scores.items():
            if score is None:
                failures[name] += 1
            else:
                cells[name].append(score)
    return {
        name: ((float(np.mean(vals)) if vals else None), failures[name])
        for name, vals in cells.items()
    }


def run_comparison(config: SimulationConfig) -> ExperimentReport:
    """Accuracy experiment: datasets x replications x approaches.

    Per dataset the replication scores are averaged; the report carries the
    mean and standard deviation of those dataset means, plus one-tailed
    paired t-tests of each approach against the utadis baseline.
    """
    per_dataset = _map_datasets(_dataset_accuracy, config)
    flat = all(v < 2 for v in config.subintervals())
    stats = []
    for name in config.approaches:
        if flat and name in (learn_mod.COMPLEXITY_FIRST, learn_mod.LFP):
            stats.append(ApproachStats(name=name, available=False))
            continue
        means = [cell[name][0] for cell in per_dataset]
        fails = sum(cell[name][1] for cell in per_dataset)
        valid = [v for v in means if v is not None]
        stats.append(
            ApproachStats(
                name=name,
                available=True,
                dataset_means=tuple(float(v) for v in valid),
                mean=float(np.mean(valid)) if valid else None,
                std=float(np.std(valid, ddof=1)) if len(valid) > 1 else None,
                failures=fails,
            )
        )
    report = ExperimentReport("accuracy", config, tuple(stats))
    comparisons = []
    if learn_mod.UTADIS in config.approaches:
        base = report.approach(learn_mod.UTADIS)
        for st in stats:
            if st.name == learn_mod.UTADIS or not st.available:
                continue
            if len(st.dataset_means) == len(base.dataset_means) >= 2:
                try:
                    res = paired_t_test(st.dataset_means, base.dataset_means, config.alpha)
                except DegenerateSample:
                    continue
                comparisons.append(
                    Comparison(st.name, learn_mod.UTADIS, res.t, res.p, res.reject)
                )
    return replace(report, comparisons=tuple(comparisons))


def _dataset_apa(config: SimulationConfig, dataset_index: int) -> tuple[float | None, int]:
    ds = generate_dataset(config, dataset_index)
    scores: list[float] = []
    failures = 0
    for rep in range(config.replications):
        rng = stream(config.seed, dataset_index, 1, rep)
        refs, non = partition_reference(
            ds.truth, config.r, rng, balanced=config.balanced, q=config.q
        )
        examples = AssignmentExamples.from_pairs((i, int(ds.truth[i])) for i in refs)
        instance = ProblemInstance(ds.matrix, ds.criteria, config.q, examples)
        try:
            sets = robustness_mod.possible_assignment_sets(instance, non, config.learn)
            scores.append(robustness_mod.apa(sets, config.q))
        except ValueError:
            failures += 1
    return (float(np.mean(scores)) if scores else None), failures


def run_robustness_experiment(config: SimulationConfig) -> ExperimentReport:
    """Possible-assignment robustness experiment over the same grid."""
    per_dataset = _map_datasets(_dataset_apa, config)
    means = [v for v, _ in per_dataset if v is not None]
    failures = sum(f for _, f in per_dataset)
    stats = ApproachStats(
        name="possible-assignments",
        available=True,
        dataset_means=tuple(means),
        mean=float(np.mean(means)) if means else None,
        std=float(np.std(means, ddof=1)) if len(means) > 1 else None,
        failures=failures,
    )
    return ExperimentReport("apa", config, (stats,))


def _map_datasets(fn, config: SimulationConfig):
    indices = range(config.datasets)
    if config.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=config.jobs) as pool:
            return list(pool.map(fn, [config] * config.datasets, indices))
    return [fn(config, i) for i in indices]
