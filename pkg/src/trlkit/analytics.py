"""Read-side analytics over transition histories.

Pure functions of the event log: dwell time per level, visited-level paths,
frequent n-gram mining, bottleneck ranking, and objective checks. Durations
are computed as exact timedeltas; the current interval is always closed at
an explicit `now` so reports are reproducible.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from typing import Mapping, Sequence

from .errors import (
    EmptyPortfolio,
    InvalidNGramLength,
    InvalidNow,
    MissingInitiation,
    UnsortedLog,
)
from .model import TransitionCause, TransitionEvent, validate_level

BIRTH_CAUSES = (TransitionCause.INITIATION, TransitionCause.FORK_CHILD_CREATED)


@dataclass
class LevelDwell:
    total: timedelta = timedelta(0)
    interval_count: int = 0

    @property
    def total_seconds(self) -> float:
        return self.total.total_seconds()


@dataclass
class TechDwellReport:
    tech_id: str
    per_level: dict[int, LevelDwell] = field(default_factory=dict)

    def total(self) -> timedelta:
        return sum((dwell.total for dwell in self.per_level.values()), timedelta(0))


@dataclass
class LevelPath:
    tech_id: str
    sequence: list[int]
    cycle_count: int


def _check_log(events: Sequence[TransitionEvent]) -> None:
    if not events:
        raise MissingInitiation("event log is empty")
    if events[0].cause not in BIRTH_CAUSES:
        raise MissingInitiation(f"log starts with {events[0].cause.value}, not an initiation")
    for earlier, later in zip(events, events[1:]):
        if later.seq <= earlier.seq or later.timestamp < earlier.timestamp:
            raise UnsortedLog(f"event {later.seq} out of order after {earlier.seq}")
        if later.cause in BIRTH_CAUSES:
            raise MissingInitiation(f"second birth event at seq {later.seq}")


def time_per_level(events: Sequence[TransitionEvent], now: datetime) -> TechDwellReport:
    """Sum, per level, the intervals the technology sat at that level.

    Re-visits accumulate; the open interval at the current level is closed
    at `now`. Interval totals add up to exactly now minus the birth time.
    """
    _check_log(events)
    if now < events[-1].timestamp:
        raise InvalidNow(f"now {now.isoformat()} precedes the last event")
    report = TechDwellReport(tech_id=events[0].tech_id)
    for event, closing in zip(events, events[1:]):
        _add_interval(report, event.to_level, closing.timestamp - event.timestamp)
    _add_interval(report, events[-1].to_level, now - events[-1].timestamp)
    return report


def _add_interval(report: TechDwellReport, level: int, length: timedelta) -> None:
    dwell = report.per_level.setdefault(level, LevelDwell())
    dwell.total += length
    dwell.interval_count += 1


def level_path(events: Sequence[TransitionEvent]) -> LevelPath:
    """Ordered levels visited, starting at the birth level; cycle_count is
    the number of regressions."""
    _check_log(events)
    sequence = [event.to_level for event in events]
    cycles = sum(1 for event in events if event.cause is TransitionCause.REGRESSION)
    return LevelPath(tech_id=events[0].tech_id, sequence=sequence, cycle_count=cycles)


def frequent_paths(
    events_by_tech: Mapping[str, Sequence[TransitionEvent]], n: int = 2
) -> list[tuple[tuple[int, ...], int]]:
    """Count every consecutive n-gram of visited levels across the portfolio.

    Sorted by count descending, ties broken lexicographically by n-gram.
    """
    if not isinstance(n, int) or isinstance(n, bool) or n < 2:
        raise InvalidNGramLength(f"n-gram length must be an integer >= 2, got {n!r}")
    counts: dict[tuple[int, ...], int] = {}
    for events in events_by_tech.values():
        sequence = level_path(events).sequence
        for start in range(len(sequence) - n + 1):
            gram = tuple(sequence[start : start + n])
            counts[gram] = counts.get(gram, 0) + 1
    return sorted(counts.items(), key=lambda item: (-item[1], item[0]))


@dataclass
class LevelBottleneck:
    level: int
    median_dwell: timedelta
    tech_count: int
    total_dwell: timedelta


def bottleneck_report(
    events_by_tech: Mapping[str, Sequence[TransitionEvent]], now: datetime
) -> list[LevelBottleneck]:
    """Levels ranked by the median of per-technology total dwell, descending.

    Levels never visited are omitted; ties rank the lower level first.
    """
    if not events_by_tech:
        raise EmptyPortfolio("no technologies to analyze")
    dwells_per_level: dict[int, list[timedelta]] = {}
    for events in events_by_tech.values():
        report = time_per_level(events, now)
        for level, dwell in report.per_level.items():
            dwells_per_level.setdefault(level, []).append(dwell.total)
    rows = [
        LevelBottleneck(
            level=level,
            median_dwell=statistics.median(samples),
            tech_count=len(samples),
            total_dwell=sum(samples, timedelta(0)),
        )
        for level, samples in dwells_per_level.items()
    ]
    rows.sort(key=lambda row: (-row.median_dwell, row.level))
    return rows


def okr_check(
    events: Sequence[TransitionEvent], target_level: int, deadline: datetime, now: datetime
) -> str:
    """'met' once any transition reaches the target level by the deadline,
    'missed' when the deadline has passed without that, else 'pending'."""
    validate_level(target_level)
    _check_log(events)
    for event in events:
        if event.to_level >= target_level and event.timestamp <= deadline:
            return "met"
    return "missed" if now > deadline else "pending"
