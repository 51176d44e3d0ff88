"""Orchestration of the evaluation protocol.

Stages: prepare a dataset (trim, drop empty, cap ages, rebalance,
augment), train the baseline forest, run record-sequential inference
under a wall-clock budget, score a predictions file against labels, and
aggregate per-dataset scores into a leaderboard.

Exit codes used by the CLI: 0 success, 1 unexpected failure, 2
validation failure, 3 budget exceeded, 4 partial success (some records
failed during inference but a complete predictions file was written).
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import (BudgetExceededError, ConfigError, EcgTriageError,
                     LeaderboardError, ManifestError, ModelFormatError)
from .features import extract_features, feature_fingerprint, median_age
from .forest import (ForestConfig, ForestModel, load_model, predict_proba,
                     save_model, train)
from .manifest import DatasetManifest, ManifestEntry, read_manifest, write_manifest
from .metric import CapacityConstraint, CapacityMetricReport, aggregate_mean
from .pipeline import augment_record, cap_age, is_empty, rebalance_prevalence, trim_zero_padding
from .scoring_io import (PredictionRow, read_labels, read_predictions,
                         score_predictions, write_predictions, write_report)
from .synth import MANIFEST_NAME
from .wfdb_io import read_record, renamed, write_record

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VALIDATION = 2
EXIT_BUDGET = 3
EXIT_PARTIAL = 4

DEFAULT_CAPACITY = 0.05


@dataclass(frozen=True)
class RunBudget:
    """Wall-clock limits, in seconds. Desk-scale stand-ins for the real
    protocol's 72-hour training and multi-day inference windows."""

    train_limit: float = 600.0
    infer_limit: float = 300.0

    def __post_init__(self):
        if not (self.train_limit > 0 and self.infer_limit > 0):
            raise ConfigError(f"budget limits must be positive, got {self}")


class _Stopwatch:
    def __init__(self, limit: float, stage: str):
        self.t0 = time.monotonic()
        self.limit = limit
        self.stage = stage

    def check(self) -> None:
        elapsed = time.monotonic() - self.t0
        if elapsed > self.limit:
            raise BudgetExceededError(
                f"{self.stage} exceeded its {self.limit}s budget "
                f"({elapsed:.3f}s elapsed)")


@dataclass
class PrepareConfig:
    """Replayable preparation settings.

    Text form is ``key = value`` lines (``#`` comments allowed); keys are
    ``target_prevalence`` and ``seed``. An empty config prepares the
    dataset without rebalancing or augmentation.
    """

    target_prevalence: Optional[Fraction] = None
    seed: int = 0


def parse_prepare_config(text: str) -> PrepareConfig:
    config = PrepareConfig()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_no}: expected key = value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "target_prevalence":
            try:
                config.target_prevalence = Fraction(value)
            except (ValueError, ZeroDivisionError):
                raise ConfigError(
                    f"line {line_no}: target_prevalence {value!r} is not a "
                    "fraction or decimal") from None
            if not (0 < config.target_prevalence < 1):
                raise ConfigError(f"line {line_no}: target_prevalence must be "
                                  f"in (0, 1), got {value}")
        elif key == "seed":
            try:
                config.seed = int(value)
            except ValueError:
                raise ConfigError(f"line {line_no}: seed {value!r} is not an "
                                  "integer") from None
        else:
            raise ConfigError(f"line {line_no}: unknown key {key!r}")
    return config


def load_dataset_manifest(dataset_dir) -> DatasetManifest:
    """The dataset's manifest, scanning headers when no manifest file exists.

    Scanned entries take their label from the header comment and default
    to negative when the comment is absent, which only matters for
    callers that use manifest labels (scoring reads labels separately).
    """
    dataset_dir = Path(dataset_dir)
    manifest_path = dataset_dir / MANIFEST_NAME
    if manifest_path.exists():
        return read_manifest(manifest_path)
    headers = sorted(dataset_dir.glob("*.hea"))
    if not headers:
        raise ManifestError(f"{dataset_dir}: no {MANIFEST_NAME} and no .hea files")
    entries = []
    for hea in headers:
        record = read_record(hea)
        entries.append(ManifestEntry(record_id=record.header.record_name,
                                     chagas_label=bool(record.chagas_label)))
    return DatasetManifest(entries=entries, source="scanned")


def cmd_prepare(input_dir, out_dir, config: PrepareConfig) -> DatasetManifest:
    """Run the preparation pipeline and write a fully provenanced copy.

    Order: cap ages, trim zero padding, drop empty records, rebalance
    prevalence (when configured), then synthesize the oversampling
    duplicates by applying their augmentation plans. Any record-level
    failure is reported with the record id.
    """
    input_dir, out_dir = Path(input_dir), Path(out_dir)
    source_manifest = load_dataset_manifest(input_dir)

    kept: list[ManifestEntry] = []
    excluded: list[str] = []
    for entry in source_manifest.entries:
        if entry.origin_id is not None:
            raise ManifestError(
                f"{entry.record_id}: input dataset already contains "
                "oversampling duplicates; prepare expects originals only")
        try:
            record = cap_age(read_record(input_dir / f"{entry.record_id}.hea"))
            record = trim_zero_padding(record)
            if is_empty(record):
                excluded.append(entry.record_id)
                continue
            write_record(record, out_dir)
        except EcgTriageError as exc:
            raise type(exc)(f"record {entry.record_id!r}: {exc}") from exc
        kept.append(replace(entry))

    manifest = DatasetManifest(entries=kept, source=source_manifest.source,
                               metadata=dict(source_manifest.metadata))
    if config.target_prevalence is not None:
        manifest = rebalance_prevalence(manifest, config.target_prevalence,
                                        config.seed)
        for entry in manifest.entries:
            if entry.origin_id is None:
                continue
            try:
                origin = read_record(out_dir / f"{entry.origin_id}.hea")
                duplicate = renamed(augment_record(origin, entry.plan),
                                    entry.record_id)
                write_record(duplicate, out_dir)
            except EcgTriageError as exc:
                raise type(exc)(f"record {entry.record_id!r}: {exc}") from exc

    manifest.metadata["prepared_seed"] = str(config.seed)
    manifest.metadata["prepared_target_prevalence"] = (
        str(config.target_prevalence) if config.target_prevalence is not None
        else "none")
    manifest.metadata["excluded_empty"] = (
        ",".join(excluded) if excluded else "none")
    write_manifest(manifest, out_dir / MANIFEST_NAME)
    return manifest


def cmd_train(dataset_dir, model_path, config: ForestConfig | None = None,
              seed: int = 0, budget: RunBudget | None = None) -> ForestModel:
    """Extract features for every manifest record and fit the forest.

    The wall clock is checked between records and after the fit; an
    exhausted budget aborts without writing a model file.
    """
    budget = budget or RunBudget()
    watch = _Stopwatch(budget.train_limit, "training")
    dataset_dir = Path(dataset_dir)
    manifest = load_dataset_manifest(dataset_dir)

    records = []
    labels = []
    for entry in manifest.entries:
        watch.check()
        record = read_record(dataset_dir / f"{entry.record_id}.hea")
        records.append(record)
        labels.append(entry.chagas_label)
    age_default = median_age([r.age for r in records])
    features = np.stack([extract_features(r, age_default=age_default)
                         for r in records])
    watch.check()
    model = train(features, np.asarray(labels, dtype=bool), config, seed,
                  age_default=age_default)
    watch.check()
    save_model(model, model_path)
    return model


def cmd_infer(model_path, dataset_dir, out_path,
              budget: RunBudget | None = None) -> tuple[list[PredictionRow], int]:
    """Sequential inference over the manifest; returns (rows, exit code).

    Records are processed strictly one at a time in manifest order. A
    record that cannot be read or featurized becomes an explicit failure
    row and the run continues (exit code 4). Exhausting the budget
    aborts the run with no predictions file at all: partial output is
    flagged, never silently scored.
    """
    budget = budget or RunBudget()
    model = load_model(model_path)
    if model.fingerprint != feature_fingerprint():
        raise ModelFormatError(
            f"model {model_path} was trained on a different feature layout "
            f"({model.fingerprint} vs extractor {feature_fingerprint()})")
    dataset_dir = Path(dataset_dir)
    manifest = load_dataset_manifest(dataset_dir)

    watch = _Stopwatch(budget.infer_limit, "inference")
    rows: list[PredictionRow] = []
    failures = 0
    for entry in manifest.entries:
        watch.check()
        try:
            record = read_record(dataset_dir / f"{entry.record_id}.hea")
            vector = extract_features(record, age_default=model.age_default)
            proba = float(predict_proba(model, vector,
                                        fingerprint=feature_fingerprint()))
            rows.append(PredictionRow(record_id=entry.record_id,
                                      probability=proba,
                                      binary=proba >= 0.5))
        except EcgTriageError:
            failures += 1
            rows.append(PredictionRow(record_id=entry.record_id,
                                      probability=None, binary=False))
    watch.check()
    write_predictions(rows, out_path)
    return rows, (EXIT_PARTIAL if failures else EXIT_OK)


def cmd_score(labels_source, predictions_path, m=DEFAULT_CAPACITY,
              report_path=None) -> CapacityMetricReport:
    """Score a predictions file against labels; optionally write the report."""
    labels = read_labels(labels_source)
    rows = read_predictions(predictions_path)
    report = score_predictions(labels, rows, CapacityConstraint.of(m))
    if report_path is not None:
        write_report(report, report_path)
    return report


@dataclass
class LeaderboardRow:
    entry: str
    scores: dict[str, Optional[float]] = field(default_factory=dict)
    mean_test: float = float("nan")
    status: str = "ok"


@dataclass
class Leaderboard:
    datasets: list[str]
    validation: Optional[str]
    rows: list[LeaderboardRow]
    medians: dict[str, float]


def read_score_matrix(path) -> tuple[list[str], list[tuple[str, list[Optional[float]]]]]:
    """Parse an entry-by-dataset score table.

    CSV with header ``entry,<dataset>,...``; an empty cell means the
    entry has no score for that dataset.
    """
    path = Path(path)
    if not path.exists():
        raise LeaderboardError(f"score matrix not found: {path}")
    rows = [row for row in csv.reader(path.read_text(encoding="ascii").splitlines())
            if row]
    if not rows or len(rows[0]) < 2 or rows[0][0] != "entry":
        raise LeaderboardError(
            f"{path}: first row must be the header entry,<dataset>,...")
    datasets = rows[0][1:]
    if len(set(datasets)) != len(datasets):
        raise LeaderboardError(f"{path}: duplicate dataset columns")
    parsed = []
    seen = set()
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(datasets) + 1:
            raise LeaderboardError(
                f"{path}: row {i} has {len(row)} fields, expected "
                f"{len(datasets) + 1} (ragged matrix)")
        name = row[0]
        if name in seen:
            raise LeaderboardError(f"{path}: duplicate entry {name!r}")
        seen.add(name)
        scores: list[Optional[float]] = []
        for dataset, cell in zip(datasets, row[1:]):
            if cell == "":
                scores.append(None)
                continue
            try:
                scores.append(float(cell))
            except ValueError:
                raise LeaderboardError(
                    f"{path}: row {i}, column {dataset}: {cell!r} is not a "
                    "number") from None
        parsed.append((name, scores))
    if not parsed:
        raise LeaderboardError(f"{path}: no entries")
    return datasets, parsed


def cmd_leaderboard(datasets: Sequence[str],
                    entries: Sequence[tuple[str, Sequence[Optional[float]]]],
                    validation: Optional[str] = None) -> Leaderboard:
    """Rank entries by mean test score; test = every non-validation dataset.

    The mean covers the test scores an entry actually has; entries with
    missing datasets are flagged in their status rather than dropped.
    """
    datasets = list(datasets)
    if validation is not None and validation not in datasets:
        raise LeaderboardError(
            f"validation dataset {validation!r} is not a column: {datasets}")
    test_sets = [d for d in datasets if d != validation]
    if not test_sets:
        raise LeaderboardError("no test datasets left after excluding validation")

    rows = []
    for name, scores in entries:
        by_dataset = dict(zip(datasets, scores))
        present = [by_dataset[d] for d in test_sets if by_dataset[d] is not None]
        missing = [d for d in datasets if by_dataset[d] is None]
        if not present:
            raise LeaderboardError(f"entry {name!r} has no test scores")
        rows.append(LeaderboardRow(
            entry=name, scores=by_dataset,
            mean_test=aggregate_mean(present),
            status="ok" if not missing else "incomplete: no score for "
                                            + ",".join(missing)))
    rows.sort(key=lambda r: (-r.mean_test, r.entry))

    medians = {}
    for dataset in datasets:
        present = [r.scores[dataset] for r in rows if r.scores[dataset] is not None]
        if present:
            medians[dataset] = float(np.median(present))
    return Leaderboard(datasets=datasets, validation=validation,
                       rows=rows, medians=medians)


def format_percent(value: float) -> str:
    """Two significant figures, as used for median-change reporting."""
    magnitude = abs(value)
    if magnitude >= 10:
        text = f"{value:.0f}"
    elif magnitude >= 1:
        text = f"{value:.1f}"
    else:
        text = f"{value:.2f}"
    return text + "%"


def format_leaderboard(board: Leaderboard) -> str:
    """Fixed-width text table plus median summary lines."""
    def cell(value: Optional[float]) -> str:
        return "-" if value is None else f"{value:.3f}"

    header = ["rank", "entry"] + list(board.datasets) + ["mean_test", "status"]
    body = []
    for rank, row in enumerate(board.rows, start=1):
        body.append([str(rank), row.entry]
                    + [cell(row.scores[d]) for d in board.datasets]
                    + [f"{row.mean_test:.3f}", row.status])
    widths = [max(len(line[i]) for line in [header] + body)
              for i in range(len(header))]
    lines = ["# leaderboard v1"]
    for line in [header] + body:
        lines.append("  ".join(text.ljust(width)
                               for text, width in zip(line, widths)).rstrip())

    for dataset in board.datasets:
        if dataset in board.medians:
            lines.append(f"# median {dataset}: {board.medians[dataset]:.3f}")
    if board.validation is not None and board.validation in board.medians:
        val_median = board.medians[board.validation]
        for dataset in board.datasets:
            if dataset == board.validation or dataset not in board.medians:
                continue
            if val_median == 0:
                continue
            drop = 100.0 * (val_median - board.medians[dataset]) / val_median
            lines.append(f"# median change {board.validation} -> {dataset}: "
                         f"drop {format_percent(drop)}")
    return "\n".join(lines) + "\n"
