"""File formats for scoring: labels, predictions, and metric reports.

Labels come either from a dataset directory (the ``Chagas label`` header
comment of every ``.hea`` file) or from a two-column CSV table:

    record_id,chagas_label
    rec00000,true

Predictions are a three-column CSV table; the probability column holds a
decimal number or the literal token ``failed`` for records the model
could not process (scored as probability 0):

    record_id,probability,binary
    rec00000,0.125,0
    rec00001,failed,0

Reports are ``key=value`` lines (one ``warning=`` line per warning), so
byte-identical inputs produce byte-identical report files. Binary
predictions are echoed in the report but never affect the score.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from math import isfinite
from pathlib import Path
from typing import Optional, Sequence

from .errors import CohortError, PredictionsError
from .metric import (CapacityConstraint, CapacityMetricReport, ScoredCohort,
                     ScoredRow, compute_report)
from .wfdb_io import KEY_CHAGAS, parse_header

_LABEL_COLUMNS = ("record_id", "chagas_label")
_PREDICTION_COLUMNS = ("record_id", "probability", "binary")
FAILED_TOKEN = "failed"
REPORT_FORMAT = "capacity-metric-report-v1"


@dataclass(frozen=True)
class PredictionRow:
    """One model output; probability None means the model failed here."""

    record_id: str
    probability: Optional[float]
    binary: bool


def _parse_bool(text: str, where: str) -> bool:
    if text not in ("true", "false"):
        raise CohortError(f"{where}: label must be true/false, got {text!r}")
    return text == "true"


def read_labels(source) -> dict[str, bool]:
    """Record-id to label map from a dataset directory or a CSV table.

    Directory form reads every ``.hea`` file in name order; a record
    without a label comment is an error, since unlabeled records cannot
    be scored.
    """
    path = Path(source)
    if path.is_dir():
        labels: dict[str, bool] = {}
        headers = sorted(path.glob("*.hea"))
        if not headers:
            raise CohortError(f"no .hea files in {path}")
        for hea in headers:
            header = parse_header(hea.read_text(encoding="ascii"))
            raw = header.comments.get(KEY_CHAGAS)
            if raw is None:
                raise CohortError(f"{hea.name}: no {KEY_CHAGAS!r} comment")
            labels[header.record_name] = _parse_bool(raw.lower(), hea.name)
        return labels

    if not path.exists():
        raise CohortError(f"labels source not found: {path}")
    rows = list(csv.reader(path.read_text(encoding="ascii").splitlines()))
    if not rows or tuple(rows[0]) != _LABEL_COLUMNS:
        raise CohortError(
            f"{path}: first row must be the header {','.join(_LABEL_COLUMNS)}")
    labels = {}
    for i, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 2:
            raise CohortError(f"{path}: row {i} has {len(row)} fields, expected 2")
        record_id, label_text = row
        if record_id in labels:
            raise CohortError(f"{path}: duplicate record_id {record_id!r}")
        labels[record_id] = _parse_bool(label_text, f"{path} row {i}")
    if not labels:
        raise CohortError(f"{path}: no label rows")
    return labels


def write_predictions(rows: Sequence[PredictionRow], path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(_PREDICTION_COLUMNS)]
    for row in rows:
        prob = FAILED_TOKEN if row.probability is None else repr(row.probability)
        lines.append(f"{row.record_id},{prob},{int(row.binary)}")
    path.write_text("\n".join(lines) + "\n", encoding="ascii", newline="\n")
    return path


def read_predictions(path) -> list[PredictionRow]:
    path = Path(path)
    if not path.exists():
        raise PredictionsError(f"predictions file not found: {path}")
    rows = list(csv.reader(path.read_text(encoding="ascii").splitlines()))
    if not rows or tuple(rows[0]) != _PREDICTION_COLUMNS:
        raise PredictionsError(
            f"{path}: first row must be the header {','.join(_PREDICTION_COLUMNS)}")
    out = []
    seen = set()
    for i, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 3:
            raise PredictionsError(f"{path}: row {i} has {len(row)} fields, expected 3")
        record_id, prob_text, binary_text = row
        if record_id in seen:
            raise PredictionsError(f"{path}: duplicate prediction for {record_id!r}")
        seen.add(record_id)
        if prob_text == FAILED_TOKEN:
            probability = None
        else:
            try:
                probability = float(prob_text)
            except ValueError:
                raise PredictionsError(
                    f"{path}: row {i}: probability {prob_text!r} is not a number "
                    f"or {FAILED_TOKEN!r}") from None
            if not isfinite(probability):
                raise PredictionsError(
                    f"{path}: row {i}: probability must be finite, got {prob_text}")
        if binary_text not in ("0", "1"):
            raise PredictionsError(
                f"{path}: row {i}: binary must be 0 or 1, got {binary_text!r}")
        out.append(PredictionRow(record_id=record_id, probability=probability,
                                 binary=binary_text == "1"))
    if not out:
        raise PredictionsError(f"{path}: no prediction rows")
    return out


def score_predictions(labels: dict[str, bool], rows: Sequence[PredictionRow],
                      constraint: CapacityConstraint) -> CapacityMetricReport:
    """Score predictions against labels; every labeled record needs a row.

    Failed rows enter the ranking with probability 0 so a model cannot
    improve its score by crashing on hard records.
    """
    by_id = {}
    for row in rows:
        if row.record_id not in labels:
            raise PredictionsError(
                f"prediction for unknown record {row.record_id!r}")
        by_id[row.record_id] = row
    missing = [rid for rid in labels if rid not in by_id]
    if missing:
        shown = ", ".join(repr(r) for r in missing[:5])
        raise PredictionsError(
            f"{len(missing)} labeled records have no prediction row "
            f"(first: {shown}); emit an explicit {FAILED_TOKEN!r} row instead")
    cohort = ScoredCohort(tuple(
        ScoredRow(record_id=rid, label=label,
                  score=by_id[rid].probability
                  if by_id[rid].probability is not None else 0.0)
        for rid, label in labels.items()))
    failed = sum(1 for row in rows if row.probability is None)
    binary_positives = sum(1 for row in rows if row.binary)
    return compute_report(cohort, constraint, failed_records=failed,
                          binary_positives=binary_positives)


def _fmt_float(x: float) -> str:
    return repr(float(x))


def format_report(report: CapacityMetricReport) -> str:
    """Render a report as deterministic key=value text."""
    op = report.operating_point
    lines = [
        f"format={REPORT_FORMAT}",
        f"challenge_score={_fmt_float(report.challenge_score)}",
        f"expected_tp={_fmt_float(report.expected_tp)}",
        f"m={report.m}",
        f"budget={report.budget}",
        f"positives={report.positives}",
        f"negatives={report.negatives}",
        f"total={report.total}",
        f"auroc={_fmt_float(report.auroc)}",
        f"slope={_fmt_float(report.line.slope)}",
        f"tpr_intercept={_fmt_float(report.line.tpr_intercept)}",
        f"fpr_intercept={_fmt_float(report.line.fpr_intercept)}",
        f"operating_fpr={_fmt_float(op[0]) if op else 'none'}",
        f"operating_tpr={_fmt_float(op[1]) if op else 'none'}",
        f"failed_records={report.failed_records}",
        f"binary_positives={report.binary_positives}",
    ]
    lines.extend(f"warning={w}" for w in report.warnings)
    return "\n".join(lines) + "\n"


def summary_line(report: CapacityMetricReport) -> str:
    return f"challenge_score={report.challenge_score:.3f}"


def write_report(report: CapacityMetricReport, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_report(report), encoding="ascii", newline="\n")
    return path
