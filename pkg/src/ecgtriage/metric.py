"""Capacity-constrained triage scoring.

Given per-record probabilities and labels, the score is the expected
number of true positives among the top ``M = floor(m * T)`` ranked
records, divided by the number of positives, where ``m`` is the fraction
of the cohort that can be referred for confirmatory testing. Ties at the
budget cutoff are resolved uniformly at random; the expectation over
that tie-break is computed analytically, not sampled.

Also provides the ROC/capacity-line geometry: prevalence pi_p and
capacity m bound the reachable ROC region by
``pi_p * TPR + pi_n * FPR <= m``, a line with slope -pi_n/pi_p that the
optimal classifier meets at its intersection with the ROC curve.

All internal arithmetic on counts and cutoffs uses exact rationals;
floats appear only at the API boundary.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from math import floor, fsum, isfinite
from typing import Optional, Sequence

from .errors import CohortError

NEAR_TIE_GAP = 1e-12


def exact_fraction(value) -> Fraction:
    """Exact fraction; floats are read as their decimal text (0.05 -> 1/20)."""
    if isinstance(value, float):
        return Fraction(str(value))
    return Fraction(value)


@dataclass(frozen=True)
class ScoredRow:
    record_id: str
    label: bool
    score: float


@dataclass(frozen=True)
class ScoredCohort:
    """Immutable labeled, scored cohort. Validates on construction."""

    rows: tuple[ScoredRow, ...]

    def __post_init__(self):
        seen = set()
        for row in self.rows:
            if row.record_id in seen:
                raise CohortError(f"duplicate record_id {row.record_id!r}")
            seen.add(row.record_id)
            if not isfinite(row.score):
                raise CohortError(
                    f"{row.record_id}: score must be finite, got {row.score}")

    @property
    def total(self) -> int:
        return len(self.rows)

    @property
    def positives(self) -> int:
        return sum(1 for r in self.rows if r.label)

    @property
    def negatives(self) -> int:
        return self.total - self.positives

    @property
    def prevalence(self) -> Fraction:
        if not self.rows:
            return Fraction(0)
        return Fraction(self.positives, self.total)


def make_cohort(rows: Sequence[tuple[str, bool, float]]) -> ScoredCohort:
    return ScoredCohort(tuple(ScoredRow(str(i), bool(l), float(s))
                              for i, l, s in rows))


@dataclass(frozen=True)
class CapacityConstraint:
    """Referral capacity as a fraction m of the cohort; budget M = floor(m*T)."""

    m: Fraction

    def __post_init__(self):
        if not (0 < self.m <= 1):
            raise CohortError(f"capacity m must be in (0, 1], got {self.m}")

    @classmethod
    def of(cls, m) -> "CapacityConstraint":
        return cls(exact_fraction(m))

    def budget(self, total: int) -> int:
        """floor(m * T), computed exactly."""
        return floor(self.m * total)


def _expected_exact(cohort: ScoredCohort, budget: int) -> Fraction:
    """Exact expected positives among the top ``budget`` after tie-break.

    Sort descending; rows strictly above the budget cutoff are taken
    whole, and the remaining slots are filled uniformly at random from
    the rows tied at the cutoff, contributing the hypergeometric mean
    (slots * tied positives / tied rows).
    """
    total, positives = cohort.total, cohort.positives
    if budget < 0 or budget > total:
        raise CohortError(f"budget must be in [0, {total}], got {budget}")
    if budget == 0:
        return Fraction(0)
    if budget >= total:
        return Fraction(positives)

    ordered = sorted(cohort.rows, key=lambda r: r.score, reverse=True)
    cutoff = ordered[budget - 1].score
    strict_tp = sum(1 for r in ordered[:budget] if r.score > cutoff and r.label)
    strict_n = sum(1 for r in ordered[:budget] if r.score > cutoff)
    tied = [r for r in cohort.rows if r.score == cutoff]
    tied_pos = sum(1 for r in tied if r.label)
    return strict_tp + Fraction((budget - strict_n) * tied_pos, len(tied))


def expected_top_m_positives(cohort: ScoredCohort, budget: int) -> float:
    """Expected true positives within a referral budget of ``budget`` records."""
    return float(_expected_exact(cohort, budget))


def challenge_score(cohort: ScoredCohort, constraint: CapacityConstraint) -> float:
    """Expected fraction of positives referred within capacity, in [0, 1].

    A cohort with no positives has no defined score and raises; it is
    never silently reported as 0 or 1. A budget that floors to zero
    records scores 0 with a warning.
    """
    positives = cohort.positives
    if positives == 0:
        raise CohortError("challenge score is undefined with zero positives")
    budget = constraint.budget(cohort.total)
    if budget == 0:
        warnings.warn(f"capacity m={constraint.m} admits zero of "
                      f"{cohort.total} records; score is 0", stacklevel=2)
        return 0.0
    return float(_expected_exact(cohort, budget) / positives)


def near_tie_warnings(cohort: ScoredCohort) -> list[str]:
    """Messages for distinct scores closer than the tie-detection gap.

    Ties are detected by exact float equality; scores this close are
    almost certainly meant to be tied and deserve a warning.
    """
    distinct = sorted({r.score for r in cohort.rows})
    messages = []
    for lo, hi in zip(distinct, distinct[1:]):
        if hi - lo < NEAR_TIE_GAP:
            messages.append(
                f"scores {lo!r} and {hi!r} differ by less than {NEAR_TIE_GAP}; "
                "they are ranked as distinct, not tied")
    return messages


def _require_both_classes(cohort: ScoredCohort, what: str) -> None:
    if cohort.positives == 0 or cohort.negatives == 0:
        raise CohortError(f"{what} needs at least one positive and one "
                          f"negative, got P={cohort.positives}, "
                          f"N={cohort.negatives}")


def _threshold_counts(cohort: ScoredCohort) -> list[tuple[int, int]]:
    """Cumulative (false positives, true positives) per distinct threshold,
    descending, starting at (0, 0)."""
    ordered = sorted(cohort.rows, key=lambda r: r.score, reverse=True)
    counts = [(0, 0)]
    fp = tp = 0
    i = 0
    while i < len(ordered):
        j = i
        while j < len(ordered) and ordered[j].score == ordered[i].score:
            tp += ordered[j].label
            fp += not ordered[j].label
            j += 1
        counts.append((fp, tp))
        i = j
    return counts


def roc_curve(cohort: ScoredCohort) -> list[tuple[float, float]]:
    """(FPR, TPR) points, one per distinct threshold, from (0,0) to (1,1).

    All rows sharing a score are classified together, so ties contribute
    a single point.
    """
    _require_both_classes(cohort, "an ROC curve")
    positives, negatives = cohort.positives, cohort.negatives
    return [(fp / negatives, tp / positives)
            for fp, tp in _threshold_counts(cohort)]


def auroc(cohort: ScoredCohort) -> float:
    """Probability a random positive outranks a random negative, ties half.

    Computed by exact pair counting (the Mann-Whitney statistic), not by
    integrating the curve.
    """
    _require_both_classes(cohort, "AUROC")
    wins = ties = 0
    negs_below = 0
    i = 0
    ordered = sorted(cohort.rows, key=lambda r: r.score)
    while i < len(ordered):
        j = i
        group_pos = group_neg = 0
        while j < len(ordered) and ordered[j].score == ordered[i].score:
            group_pos += ordered[j].label
            group_neg += not ordered[j].label
            j += 1
        wins += group_pos * negs_below
        ties += group_pos * group_neg
        negs_below += group_neg
        i = j
    pairs = cohort.positives * cohort.negatives
    return float(Fraction(2 * wins + ties, 2 * pairs))


def trapezoid_area(curve: Sequence[tuple[float, float]]) -> float:
    """Trapezoidal area under a piecewise-linear ROC curve."""
    return fsum((x1 - x0) * (y0 + y1) / 2.0
                for (x0, y0), (x1, y1) in zip(curve, curve[1:]))


@dataclass(frozen=True)
class CapacityLine:
    """The feasibility boundary pi_p*TPR + pi_n*FPR = m in ROC space."""

    slope: float
    tpr_intercept: float
    fpr_intercept: float
    pi_p: Fraction = field(repr=False)
    m: Fraction = field(repr=False)


def capacity_line(prevalence, m) -> CapacityLine:
    """Boundary line for referral fraction m at a given prevalence.

    Intercepts may exceed 1; the feasible region is then clipped by the
    ROC unit box.
    """
    pi_p = exact_fraction(prevalence)
    m_exact = exact_fraction(m)
    if not (0 < pi_p < 1):
        raise CohortError(f"prevalence must be in (0, 1), got {pi_p}")
    if not (0 < m_exact <= 1):
        raise CohortError(f"capacity m must be in (0, 1], got {m_exact}")
    pi_n = 1 - pi_p
    return CapacityLine(slope=float(-pi_n / pi_p),
                        tpr_intercept=float(m_exact / pi_p),
                        fpr_intercept=float(m_exact / pi_n),
                        pi_p=pi_p, m=m_exact)


def optimal_operating_point(curve: Sequence[tuple[float, float]],
                            line: CapacityLine) -> Optional[tuple[float, float]]:
    """Best reachable ROC point under the capacity boundary.

    ``g(x, y) = pi_p*y + pi_n*x - m`` is non-decreasing along the curve,
    so the feasible portion is a prefix ending where the curve crosses
    g = 0 (the whole curve if it never does). The operating point is the
    maximum-TPR point of that prefix; when a flat segment makes several
    points share that TPR, the one with the lowest FPR wins, since extra
    referrals past the last true positive are wasted. Segment crossings
    are solved in exact rational arithmetic.
    """
    if not curve:
        return None
    pi_p, m = line.pi_p, line.m
    pi_n = 1 - pi_p

    def g(point: tuple[Fraction, Fraction]) -> Fraction:
        return pi_p * point[1] + pi_n * point[0] - m

    exact = [(Fraction(x), Fraction(y)) for x, y in curve]
    if g(exact[0]) > 0:
        return None

    if g(exact[-1]) <= 0:
        crossing = exact[-1]
        prefix_end = len(exact) - 1
    else:
        crossing = None
        for i in range(1, len(exact)):
            if g(exact[i]) >= 0:
                prev, point = exact[i - 1], exact[i]
                ga, gb = g(prev), g(point)
                t = -ga / (gb - ga)
                crossing = (prev[0] + t * (point[0] - prev[0]),
                            prev[1] + t * (point[1] - prev[1]))
                prefix_end = i - 1
                break
        assert crossing is not None

    best = crossing
    for point in exact[:prefix_end + 1]:
        if point[1] == crossing[1]:
            best = point
            break
    return float(best[0]), float(best[1])


@dataclass(frozen=True)
class CapacityMetricReport:
    """Everything the scorer reports for one cohort."""

    challenge_score: float
    expected_tp: float
    m: Fraction
    budget: int
    positives: int
    negatives: int
    total: int
    auroc: float
    line: CapacityLine
    operating_point: Optional[tuple[float, float]]
    failed_records: int = 0
    binary_positives: int = 0
    warnings: tuple[str, ...] = ()


def compute_report(cohort: ScoredCohort, constraint: CapacityConstraint, *,
                   failed_records: int = 0,
                   binary_positives: int = 0) -> CapacityMetricReport:
    """Full report: score, AUROC, capacity geometry, and tie warnings."""
    _require_both_classes(cohort, "a capacity metric report")
    budget = constraint.budget(cohort.total)
    notes = list(near_tie_warnings(cohort))
    if budget == 0:
        notes.append(f"capacity m={constraint.m} admits zero of "
                     f"{cohort.total} records; score is 0")
        score = 0.0
        expected = 0.0
    else:
        expected_exact = _expected_exact(cohort, budget)
        expected = float(expected_exact)
        score = float(expected_exact / cohort.positives)
    line = capacity_line(cohort.prevalence, constraint.m)
    curve = roc_curve(cohort)
    return CapacityMetricReport(
        challenge_score=score,
        expected_tp=expected,
        m=constraint.m,
        budget=budget,
        positives=cohort.positives,
        negatives=cohort.negatives,
        total=cohort.total,
        auroc=auroc(cohort),
        line=line,
        operating_point=optimal_operating_point(curve, line),
        failed_records=failed_records,
        binary_positives=binary_positives,
        warnings=tuple(notes),
    )


def aggregate_mean(reports: Sequence) -> float:
    """Unweighted mean challenge score over reports (or raw scores)."""
    if not reports:
        raise CohortError("cannot aggregate an empty list of reports")
    scores = [r.challenge_score if isinstance(r, CapacityMetricReport) else float(r)
              for r in reports]
    return fsum(scores) / len(scores)
