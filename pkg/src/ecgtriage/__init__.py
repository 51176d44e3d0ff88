"""Self-contained evaluation toolkit for capacity-constrained ECG triage.

The package covers the full loop: binary record I/O with checksums,
deterministic synthetic 12-lead data, a preparation and augmentation
pipeline, a from-scratch random-forest baseline, the expected
true-positives-under-capacity metric with its exact tie handling, and a
CLI that chains the stages together.
"""

from .errors import (BudgetExceededError, CohortError, ConfigError,
                     EcgTriageError, HeaderFormatError, LeaderboardError,
                     ManifestError, ModelFormatError, PlanError,
                     PredictionsError, RecordValidationError,
                     SignalFormatError)
from .features import FEATURE_NAMES, N_FEATURES, extract_features, feature_fingerprint
from .forest import (ForestConfig, ForestModel, load_model, predict_binary,
                     predict_proba, save_model, train)
from .harness import (EXIT_BUDGET, EXIT_ERROR, EXIT_OK, EXIT_PARTIAL,
                      EXIT_VALIDATION, PrepareConfig, RunBudget)
from .kernels import BACKEND, using_compiled
from .manifest import (DatasetManifest, ManifestEntry, read_manifest,
                       validate_manifest, write_manifest)
from .metric import (CapacityConstraint, CapacityLine, CapacityMetricReport,
                     ScoredCohort, ScoredRow, aggregate_mean, auroc,
                     capacity_line, challenge_score, compute_report,
                     expected_top_m_positives, make_cohort,
                     optimal_operating_point, roc_curve)
from .pipeline import (augment_record, cap_age, is_empty,
                       rebalance_prevalence, trim_zero_padding)
from .plans import (AugmentationPlan, DeviceFilter, NoiseStep, format_plan,
                    parse_plan, validate_plan)
from .resampling import rational_ratio, resample
from .scoring_io import (PredictionRow, read_labels, read_predictions,
                         score_predictions, write_predictions, write_report)
from .synth import SynthConfig, generate_dataset, generate_record, planted_separability
from .wfdb_io import (EcgRecord, RecordHeader, SignalSpec, make_record,
                      read_record, validate_record, write_record)

__version__ = "0.1.0"

__all__ = [
    "AugmentationPlan", "BACKEND", "BudgetExceededError", "CapacityConstraint",
    "CapacityLine", "CapacityMetricReport", "CohortError", "ConfigError",
    "DatasetManifest", "DeviceFilter", "EXIT_BUDGET", "EXIT_ERROR", "EXIT_OK",
    "EXIT_PARTIAL", "EXIT_VALIDATION", "EcgRecord", "EcgTriageError",
    "FEATURE_NAMES", "ForestConfig", "ForestModel", "HeaderFormatError",
    "LeaderboardError", "ManifestEntry", "ManifestError", "ModelFormatError",
    "N_FEATURES", "NoiseStep", "PlanError", "PredictionRow",
    "PredictionsError", "PrepareConfig", "RecordHeader",
    "RecordValidationError", "RunBudget", "ScoredCohort", "ScoredRow",
    "SignalFormatError", "SignalSpec", "SynthConfig", "aggregate_mean",
    "auroc", "augment_record", "cap_age", "capacity_line", "challenge_score",
    "compute_report", "expected_top_m_positives", "extract_features",
    "feature_fingerprint", "format_plan", "generate_dataset",
    "generate_record", "is_empty", "load_model", "make_cohort",
    "make_record", "optimal_operating_point", "parse_plan",
    "planted_separability", "predict_binary", "predict_proba",
    "rational_ratio", "read_labels", "read_manifest", "read_predictions",
    "read_record", "rebalance_prevalence", "resample", "roc_curve",
    "save_model", "score_predictions", "train", "trim_zero_padding",
    "using_compiled", "validate_manifest", "validate_plan", "validate_record",
    "write_manifest", "write_predictions", "write_record", "write_report",
]
