"""Quantified risk tracking: the probability-times-value score, flagging,
sorting, and the generic test scorecard arithmetic.

Stateless helpers; the lifecycle engine owns the stored entries and
delegates every number produced here.
"""

from __future__ import annotations

from typing import Iterable, Sequence

from .errors import ProbabilityOutOfRange, ScoreOutOfBounds, ValueOutOfRange
from .model import RiskEntry, ScorecardItem

MIN_VALUE = 1
MAX_VALUE = 10


def risk_score(p_failure: float, value: int) -> float:
    """risk = p(failure) x value, with p in [0,1] and value an integer 1-10."""
    if isinstance(p_failure, bool) or not isinstance(p_failure, (int, float)):
        raise ProbabilityOutOfRange(f"p_failure must be a number in [0,1], got {p_failure!r}")
    if not 0.0 <= float(p_failure) <= 1.0:
        raise ProbabilityOutOfRange(f"p_failure must be in [0,1], got {p_failure!r}")
    if isinstance(value, bool) or not isinstance(value, int) or not MIN_VALUE <= value <= MAX_VALUE:
        raise ValueOutOfRange(f"value must be an integer in 1-10, got {value!r}")
    return float(p_failure) * value


def is_flagged(entry: RiskEntry, threshold: float) -> bool:
    return entry.risk >= threshold


def flagged_risks(entries: Iterable[RiskEntry], threshold: float) -> list[RiskEntry]:
    """Entries at or above the threshold, highest risk first, ties by id."""
    selected = [entry for entry in entries if is_flagged(entry, threshold)]
    return sorted(selected, key=lambda entry: (-entry.risk, entry.id))


def unmitigated_flagged(entries: Iterable[RiskEntry], threshold: float) -> list[RiskEntry]:
    return [entry for entry in flagged_risks(entries, threshold) if not (entry.mitigation or "").strip()]


# Default checklist for the test scorecard. Generic test-category names,
# deliberately non-normative: organizations bring their own rubric.
DEFAULT_SCORECARD_ITEMS: tuple[tuple[str, str], ...] = (
    ("data-tests", "Input features and datasets are tested"),
    ("model-tests", "Model development is tested against baselines and slices"),
    ("infra-tests", "Training and serving infrastructure is tested"),
    ("monitoring", "Serving behavior is monitored for drift and staleness"),
    ("reproducibility", "Training is reproducible from pinned code and data"),
    ("critical-scenarios", "Use-case critical scenarios and data slices run as tests"),
    ("rollback", "A tested rollback path exists for bad model pushes"),
)


def validate_scores(items: Sequence[ScorecardItem], max_score: int) -> None:
    for item in items:
        if isinstance(item.score, bool) or not isinstance(item.score, int) or not 0 <= item.score <= max_score:
            raise ScoreOutOfBounds(
                f"score for {item.item_id!r} must be an integer in 0-{max_score}, got {item.score!r}"
            )
