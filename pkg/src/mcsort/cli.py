"""Command-line interface.

Subcommands: check, adjust, learn, sort, robustness, simulate, compare.
Exit codes: 0 success, 1 usage error, 2 inconsistent examples (check only),
3 solver failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import io as mio
from . import learn as learn_mod
from . import robustness as robustness_mod
from . import simulate as simulate_mod
from .core import InvalidInstance, ProblemInstance
from .learn import LearnConfig
from .solver import BackendFailure
from .valuefn import assign_matrix, global_value

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INCONSISTENT = 2
EXIT_SOLVER = 3

APPROACH_ALIASES = {
    "1": learn_mod.COMPLEXITY_FIRST,
    "2": learn_mod.MARGIN_FIRST,
    "lfp": learn_mod.LFP,
    "utadis": learn_mod.UTADIS,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        raise UsageError(message)


def _add_bundle_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--matrix", required=True, help="performance matrix CSV")
    p.add_argument("--examples", required=True, help="assignment examples CSV")
    p.add_argument("--categories", "-q", type=int, required=True, help="number of categories")
    p.add_argument(
        "--subintervals",
        "-s",
        default="2",
        help="subinterval count, scalar or comma-separated per criterion",
    )
    p.add_argument("--epsilon", type=float, default=1e-3, help="fixed separation parameter")
    p.add_argument("--dump-lp", default=None, help="directory for LP-format program dumps")


def _add_experiment_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--m", type=int, default=6)
    p.add_argument("-q", "--categories", type=int, default=4)
    p.add_argument("-s", "--subintervals", default="2")
    p.add_argument("--r", type=float, default=0.8, help="reference proportion")
    p.add_argument("--datasets", type=int, default=10)
    p.add_argument("--replications", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--balanced", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument(
        "--paper-scale", action="store_true", help="use 10 datasets x 100 replications"
    )
    p.add_argument("--out", default=None, help="output directory for report files")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mcsort", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="check consistency of assignment examples")
    _add_bundle_args(p)

    p = sub.add_parser("adjust", help="minimally adjust inconsistent examples")
    _add_bundle_args(p)
    p.add_argument("--out", default=None, help="file for the adjusted examples CSV")

    p = sub.add_parser("learn", help="learn a sorting model and sort everything")
    _add_bundle_args(p)
    p.add_argument(
        "--approach",
        choices=sorted(APPROACH_ALIASES),
        default="2",
        help="1=complexity-first, 2=margin-first lexicographic; lfp; utadis",
    )
    p.add_argument("--out", default=None, help="file for the model JSON document")

    p = sub.add_parser("sort", help="apply a saved model to a matrix")
    p.add_argument("--model", required=True, help="model JSON document")
    p.add_argument("--matrix", required=True, help="performance matrix CSV")
    p.add_argument("--out", default=None, help="file for the assignment CSV")

    p = sub.add_parser("robustness", help="possible assignments of non-reference alternatives")
    _add_bundle_args(p)
    p.add_argument("--tau", type=float, default=1e-6, help="positivity cutoff for separation")

    p = sub.add_parser("simulate", help="Monte-Carlo robustness experiment (possible assignments)")
    _add_experiment_args(p)

    p = sub.add_parser("compare", help="Monte-Carlo accuracy comparison of the learners")
    _add_experiment_args(p)
    p.add_argument(
        "--approaches",
        default="1,2,lfp,utadis",
        help="comma-separated approaches to compare",
    )
    return parser


def _parse_subintervals(text: str, m: int) -> list[int]:
    parts = [p for p in str(text).split(",") if p.strip()]
    try:
        values = [int(p) for p in parts]
    except ValueError:
        raise UsageError(f"bad --subintervals value {text!r}") from None
    if len(values) == 1:
        values = values * m
    if len(values) != m:
        raise UsageError(f"{len(values)} subinterval counts for {m} criteria")
    if any(v < 1 for v in values):
        raise UsageError("subinterval counts must be >= 1")
    return values


def _load_bundle(args) -> tuple[ProblemInstance, list[str], list[str]]:
    matrix, names, ids = mio.parse_matrix(Path(args.matrix).read_text(encoding="utf-8"))
    subs = _parse_subintervals(args.subintervals, matrix.shape[1])
    examples = mio.parse_examples(
        Path(args.examples).read_text(encoding="utf-8"), ids, args.categories
    )
    instance = ProblemInstance.from_matrix(matrix, subs, args.categories, examples)
    return instance, names, ids


def _learn_config(args) -> LearnConfig:
    return LearnConfig(
        approach=APPROACH_ALIASES.get(getattr(args, "approach", "2"), learn_mod.MARGIN_FIRST),
        eps_fixed=getattr(args, "epsilon", 1e-3),
        tau=getattr(args, "tau", 1e-6),
        dump_dir=getattr(args, "dump_lp", None),
    )


def cmd_check(args) -> int:
    instance, _, ids = _load_bundle(args)
    result = learn_mod.check_consistency(instance, _learn_config(args))
    print(f"slack optimum: {result.objective:.9g}")
    for i, (dp, dn) in sorted(result.slacks.items()):
        if dp > 1e-9 or dn > 1e-9:
            print(f"  {ids[i]}: below {dp:.6g} above {dn:.6g}")
    if result.consistent:
        print("examples are consistent")
        return EXIT_OK
    print("examples are inconsistent", file=sys.stderr)
    return EXIT_INCONSISTENT


def cmd_adjust(args) -> int:
    instance, _, ids = _load_bundle(args)
    adjusted, moves = learn_mod.minimum_adjustment(instance, _learn_config(args))
    print(f"total category moves: {moves}")
    original = instance.examples.as_dict()
    for i, cat in adjusted:
        mark = "" if original[i] == cat else f"  (was {original[i]})"
        print(f"  {ids[i]},{cat}{mark}")
    if args.out:
        Path(args.out).write_text(mio.emit_examples(adjusted, ids), encoding="utf-8")
    return EXIT_OK


def cmd_learn(args) -> int:
    instance, names, ids = _load_bundle(args)
    config = _learn_config(args)
    result = learn_mod.run_pipeline(instance, config)
    outcome = result.outcome
    if result.adjusted:
        print(f"examples adjusted; total moves: {result.moves}")
    if outcome.gamma_star is not None:
        print(f"slope-change optimum: {outcome.gamma_star:.9g}")
    print(f"separation: {outcome.eps_star:.9g}")
    doc = mio.emit_model(outcome.model, names=names)
    if args.out:
        Path(args.out).write_text(doc, encoding="utf-8")
    else:
        print(doc, end="")
    refs = set(outcome.examples.alternatives())
    for i, cat in enumerate(result.assignments):
        tag = "reference" if i in refs else "assigned"
        print(f"  {ids[i]},{cat},{tag}")
    return EXIT_OK


def cmd_sort(args) -> int:
    docu = mio.parse_model(Path(args.model).read_text(encoding="utf-8"))
    matrix, names, ids = mio.parse_matrix(Path(args.matrix).read_text(encoding="utf-8"))
    model = docu.model
    if matrix.shape[1] != model.m:
        raise UsageError(
            f"matrix has {matrix.shape[1]} criteria but the model expects {model.m}"
        )
    clipped = 0
    for row in matrix:
        for scale, x in zip(model.criteria, row):
            if x < scale.lo or x > scale.hi:
                clipped += 1
    if clipped:
        print(f"warning: {clipped} cells outside the model scales were clamped", file=sys.stderr)
    cats = assign_matrix(model, matrix)
    lines = ["alternative,value,category"]
    for rid, row, cat in zip(ids, matrix, cats):
        lines.append(f"{rid},{global_value(model, row):.9g},{cat}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        print(text, end="")
    return EXIT_OK


def cmd_robustness(args) -> int:
    instance, _, ids = _load_bundle(args)
    config = _learn_config(args)
    sets = robustness_mod.possible_assignment_sets(instance, config=config)
    for i, cats in sorted(sets.items()):
        pretty = "{" + ", ".join(f"C{c}" for c in cats) + "}"
        print(f"  {ids[i]}: {pretty}")
    score = robustness_mod.apa(sets, instance.q)
    print(f"APA: {score:.9g}")
    return EXIT_OK


def _experiment_config(args, approaches) -> simulate_mod.SimulationConfig:
    subs = _parse_subintervals(args.subintervals, args.m)
    replications = 100 if args.paper_scale else args.replications
    return simulate_mod.SimulationConfig(
        n=args.n,
        m=args.m,
        q=args.categories,
        s=tuple(subs),
        r=args.r,
        datasets=args.datasets,
        replications=replications,
        seed=args.seed,
        balanced=args.balanced,
        approaches=approaches,
        jobs=args.jobs,
    )


def _write_report(report, out_dir: str | None) -> None:
    print(mio.report_stats_csv(report), end="")
    if report.comparisons:
        print(mio.report_comparisons_csv(report), end="")
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        Path(out_dir, "report.json").write_text(mio.report_to_json(report), encoding="utf-8")
        Path(out_dir, "stats.csv").write_text(mio.report_stats_csv(report), encoding="utf-8")
        if report.comparisons:
            Path(out_dir, "comparisons.csv").write_text(
                mio.report_comparisons_csv(report), encoding="utf-8"
            )


def cmd_simulate(args) -> int:
    config = _experiment_config(args, approaches=())
    report = simulate_mod.run_robustness_experiment(config)
    _write_report(report, args.out)
    return EXIT_OK


def cmd_compare(args) -> int:
    try:
        approaches = tuple(APPROACH_ALIASES[a.strip()] for a in args.approaches.split(","))
    except KeyError as exc:
        raise UsageError(f"unknown approach {exc.args[0]!r}") from None
    config = _experiment_config(args, approaches=approaches)
    report = simulate_mod.run_comparison(config)
    _write_report(report, args.out)
    return EXIT_OK


COMMANDS = {
    "check": cmd_check,
    "adjust": cmd_adjust,
    "learn": cmd_learn,
    "sort": cmd_sort,
    "robustness": cmd_robustness,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (mio.FormatError, InvalidInstance, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BackendFailure, learn_mod.InfeasibleExamples, learn_mod.DegenerateScaling) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
