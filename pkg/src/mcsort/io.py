"""File formats: performance matrices, example lists, model documents, reports.

Tabular data is comma-separated UTF-8 text with '.' decimal points and no
thousands separators; structured documents are JSON.  Field names are frozen
in docs/FORMATS.md.  Floats are written with repr-level precision, so every
document round-trips losslessly and byte-identically.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import AssignmentExamples, CriterionScale, SortingModel
from .simulate import ExperimentReport
from .valuefn import StandardModel, standardize

MODEL_FORMAT = "mcsort-model"
MODEL_VERSION = 1


class FormatError(ValueError):
    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(f"{code}: {message}")


def parse_matrix(text: str) -> tuple[np.ndarray, list[str], list[str]]:
    """Parse a matrix file: header row, then one row per alternative.

    Returns (matrix, criterion names, alternative ids).
    """
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if len(lines) < 2:
        raise FormatError("empty-matrix", "need a header row and at least one data row")
    header = [c.strip() for c in lines[0].split(",")]
    if len(header) < 2:
        raise FormatError("empty-matrix", "need at least one criterion column")
    names = header[1:]
    ids: list[str] = []
    rows: list[list[float]] = []
    seen: set[str] = set()
    for rix, line in enumerate(lines[1:], start=2):
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != len(header):
            raise FormatError(
                "ragged-row", f"row {rix} has {len(cells)} cells, expected {len(header)}"
            )
        if cells[0] in seen:
            raise FormatError("duplicate-alternative-id", f"id {cells[0]!r} (row {rix})")
        seen.add(cells[0])
        ids.append(cells[0])
        values = []
        for cix, cell in enumerate(cells[1:], start=2):
            try:
                values.append(float(cell))
            except ValueError:
                raise FormatError(
                    "non-numeric-cell", f"row {rix}, column {cix}: {cell!r}"
                ) from None
        rows.append(values)
    return np.array(rows, dtype=float), names, ids


def emit_matrix(matrix: np.ndarray, names: Sequence[str], ids: Sequence[str]) -> str:
    lines = ["alternative," + ",".join(names)]
    for rid, row in zip(ids, np.asarray(matrix, dtype=float)):
        lines.append(rid + "," + ",".join(repr(float(x)) for x in row))
    return "\n".join(lines) + "\n"


def parse_examples(text: str, ids: Sequence[str], q: int) -> AssignmentExamples:
    """Parse example lines "alternative-id,category"; a header line is skipped."""
    index = {rid: i for i, rid in enumerate(ids)}
    pairs: list[tuple[int, int]] = []
    seen: set[str] = set()
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    for k, line in enumerate(lines):
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != 2:
            raise FormatError("ragged-row", f"example line {k + 1}: {line!r}")
        rid, cat_text = cells
        try:
            cat = int(cat_text)
        except ValueError:
            if k == 0:
                continue  # header line
            raise FormatError("non-numeric-cell", f"category {cat_text!r} (line {k + 1})") from None
        if rid not in index:
            raise FormatError("unknown-alternative", f"id {rid!r} (line {k + 1})")
        if rid in seen:
            raise FormatError("duplicate-example", f"id {rid!r} assigned twice")
        seen.add(rid)
        if not 1 <= cat <= q:
            raise FormatError("category-out-of-range", f"{rid!r} -> {cat}, q={q}")
        pairs.append((index[rid], cat))
    return AssignmentExamples.from_pairs(pairs)


def emit_examples(examples: AssignmentExamples, ids: Sequence[str]) -> str:
    return "\n".join(f"{ids[i]},{cat}" for i, cat in examples) + "\n"


def _scale_doc(scale: CriterionScale, name: str, values: np.ndarray) -> dict:
    return {
        "name": name,
        "min": float(scale.lo),
        "max": float(scale.hi),
        "subintervals": scale.s,
        "breakpoints": [float(x) for x in scale.breakpoints],
        "values": [float(x) for x in values],
    }


def emit_model(
    model: SortingModel, standard: StandardModel | None = None, names: Sequence[str] | None = None
) -> str:
    """Serialize a model (raw and normalized form) as a JSON document."""
    if not model.criteria:
        raise FormatError("bad-model", "model has no criteria")
    if names is None:
        names = [f"g{j + 1}" for j in range(model.m)]
    if standard is None:
        standard = standardize(model)
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "categories": model.q,
        "epsilon": float(model.epsilon),
        "criteria": [
            _scale_doc(scale, name, vals)
            for scale, name, vals in zip(model.criteria, names, model.marginals)
        ],
        "thresholds": {
            "lower": float(model.lower),
            "interior": [float(x) for x in model.interior],
            "upper": float(model.upper),
        },
        "standard": {
            "epsilon": float(standard.epsilon),
            "weights": [float(x) for x in standard.weights],
            "thresholds": [float(x) for x in standard.thresholds],
            "values": [[float(x) for x in vals] for vals in standard.marginals],
        },
    }
    return json.dumps(doc, indent=2) + "\n"


@dataclass(frozen=True)
class ModelDocument:
    model: SortingModel
    names: tuple[str, ...]


def parse_model(text: str) -> ModelDocument:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError("bad-model", f"not valid JSON: {exc}") from None
    if doc.get("format") != MODEL_FORMAT:
        raise FormatError("bad-model", f"unexpected format tag {doc.get('format')!r}")
    crits = doc.get("criteria") or []
    if not crits:
        raise FormatError("bad-model", "model has no criteria")
    scales, marginals, names = [], [], []
    for c in crits:
        scales.append(
            CriterionScale(
                lo=float(c["min"]),
                hi=float(c["max"]),
                s=int(c["subintervals"]),
                breakpoints=np.array(c["breakpoints"], dtype=float),
            )
        )
        marginals.append(np.array(c["values"], dtype=float))
        names.append(str(c["name"]))
    th = doc["thresholds"]
    model = SortingModel(
        criteria=tuple(scales),
        marginals=tuple(marginals),
        interior=np.array(th["interior"], dtype=float),
        epsilon=float(doc["epsilon"]),
        lower=float(th["lower"]),
        upper=float(th["upper"]),
    )
    if model.q != int(doc["categories"]):
        raise FormatError("bad-model", "categories do not match threshold count")
    return ModelDocument(model=model, names=tuple(names))


def _config_doc(report: ExperimentReport) -> dict:
    cfg = dataclasses.asdict(report.config)
    cfg["approaches"] = list(cfg["approaches"])
    if isinstance(cfg["s"], tuple):
        cfg["s"] = list(cfg["s"])
    return cfg


def report_to_json(report: ExperimentReport) -> str:
    doc = {
        "format": "mcsort-report",
        "metric": report.metric,
        "config": _config_doc(report),
        "approaches": [dataclasses.asdict(st) for st in report.stats],
        "comparisons": [dataclasses.asdict(cmp) for cmp in report.comparisons],
    }
    for st in doc["approaches"]:
        st["dataset_means"] = list(st["dataset_means"])
    return json.dumps(doc, indent=2) + "\n"


def report_stats_csv(report: ExperimentReport) -> str:
    lines = ["approach,available,mean,std,failures"]
    for st in report.stats:
        mean = "" if st.mean is None else repr(st.mean)
        std = "" if st.std is None else repr(st.std)
        lines.append(f"{st.name},{int(st.available)},{mean},{std},{st.failures}")
    return "\n".join(lines) + "\n"


def report_comparisons_csv(report: ExperimentReport) -> str:
    lines = ["approach,baseline,t,p,reject"]
    for cmp in report.comparisons:
        lines.append(f"{cmp.name_a},{cmp.name_b},{repr(cmp.t)},{repr(cmp.p)},{int(cmp.reject)}")
    return "\n".join(lines) + "\n"
