"""Exception types shared across the toolkit."""


class EcgTriageError(Exception):
    """Base class for all toolkit errors."""


class HeaderFormatError(EcgTriageError):
    """Header text does not match the documented grammar."""


class SignalFormatError(EcgTriageError):
    """Signal file is unreadable: wrong size, bad checksum, or an
    unsupported storage format code."""


class RecordValidationError(EcgTriageError):
    """A record violates one or more invariants.

    ``violations`` holds one human-readable description per broken rule.
    """

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class PlanError(EcgTriageError):
    """An augmentation plan is malformed or cannot be applied."""


class ManifestError(EcgTriageError):
    """A dataset manifest is malformed or an operation on it is invalid."""


class CohortError(EcgTriageError):
    """A scored cohort is degenerate for the requested computation."""


class PredictionsError(EcgTriageError):
    """A predictions table is malformed or inconsistent with the labels."""


class ModelFormatError(EcgTriageError):
    """A model file has the wrong version, fingerprint, or structure."""


class BudgetExceededError(EcgTriageError):
    """A wall-clock budget was exhausted before the stage finished."""


class ConfigError(EcgTriageError):
    """A configuration file or value is invalid."""


class LeaderboardError(EcgTriageError):
    """A score matrix is ragged or otherwise unusable."""
