"""Rule evaluation: transition legality, system-level readiness, card checks.

Side-effect-free functions over the domain types. The lifecycle engine is
the only caller allowed to act on these verdicts; everything here can be
invoked concurrently and replayed deterministically.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import CyclicComposition, UnresolvedComponent
from .model import (
    GATE_ASSUMPTIONS_AND_LIMITATIONS,
    CardVersion,
    Technology,
    TechKind,
    TechStatus,
    TransitionCause,
    TrlCard,
    validate_level,
)
from .policy import LevelPolicy

# Illegal-transition reason codes (mirrored by the error classes of the
# same names for commands that attempt the move anyway).
SKIP_NOT_ALLOWED = "SkipNotAllowed"
NOT_A_STEP = "NotAStep"
NOT_LOWER = "NotLower"
INITIATION_HAS_NO_SOURCE = "InitiationHasNoSource"


@dataclass(frozen=True)
class Verdict:
    legal: bool
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.legal


LEGAL = Verdict(True)


def validate_transition(from_level: int | None, to_level: int, cause: TransitionCause) -> Verdict:
    """Decide whether a single level move is allowed.

    Graduations advance exactly one level, regressions go strictly lower,
    initiations have no source level, and fork births may not place the
    child above its parent. Total over valid levels; never raises for a
    disallowed combination, it reports it.
    """
    validate_level(to_level)
    if from_level is not None:
        validate_level(from_level)
    cause = TransitionCause(cause)

    if cause is TransitionCause.INITIATION:
        if from_level is not None:
            return Verdict(False, INITIATION_HAS_NO_SOURCE)
        return LEGAL
    if cause is TransitionCause.GRADUATION:
        if from_level is None or to_level <= from_level:
            return Verdict(False, NOT_A_STEP)
        if to_level > from_level + 1:
            return Verdict(False, SKIP_NOT_ALLOWED)
        return LEGAL
    if cause is TransitionCause.REGRESSION:
        if from_level is None or to_level >= from_level:
            return Verdict(False, NOT_LOWER)
        return LEGAL
    # fork-child-created: from_level is the parent's level at fork time
    if from_level is None:
        return Verdict(False, NOT_A_STEP)
    if to_level > from_level:
        return Verdict(False, SKIP_NOT_ALLOWED)
    return LEGAL


class ArchivedComponentWarning(UserWarning):
    """A composition's readiness was computed past archived components."""


def system_trl(tech: Technology, registry: Mapping[str, Technology]) -> int:
    """Readiness of a technology as a system: the minimum over its parts.

    Leaves report their own level. Compositions recurse into components,
    skipping archived ones (with a warning); a composition whose parts are
    all archived falls back to the minimum over the archived parts.
    """
    return _system_trl(tech, registry, visiting=set())


def _system_trl(tech: Technology, registry: Mapping[str, Technology], visiting: set[str]) -> int:
    if tech.kind is not TechKind.COMPOSITION:
        return tech.current_level
    if tech.id in visiting:
        raise CyclicComposition(f"component cycle through {tech.id!r}")
    visiting.add(tech.id)
    try:
        components: list[Technology] = []
        for component_id in tech.components:
            component = registry.get(component_id)
            if component is None:
                raise UnresolvedComponent(f"{tech.id!r} references unknown component {component_id!r}")
            components.append(component)
        active = [c for c in components if c.status is TechStatus.ACTIVE]
        if len(active) < len(components):
            skipped = sorted(c.id for c in components if c.status is not TechStatus.ACTIVE)
            warnings.warn(
                f"system readiness of {tech.id!r} ignores archived components: {', '.join(skipped)}",
                ArchivedComponentWarning,
                stacklevel=3,
            )
        pool = active or components
        return min(_system_trl(component, registry, visiting) for component in pool)
    finally:
        visiting.discard(tech.id)


@dataclass
class SectionCheck:
    section_id: str
    level: int
    present: bool


@dataclass
class CardValidationReport:
    level: int
    checks: list[SectionCheck] = field(default_factory=list)

    @property
    def missing(self) -> list[str]:
        return [check.section_id for check in self.checks if not check.present]

    @property
    def graduation_ready(self) -> bool:
        return not self.missing


def section_present(version: CardVersion, section_id: str) -> bool:
    """A section is present when a deliverable carries its id; the
    assumptions-and-limitations section is also satisfied by recorded
    modeling assumptions."""
    if section_id in version.section_ids():
        return True
    if section_id == GATE_ASSUMPTIONS_AND_LIMITATIONS:
        return bool(version.implicit_knowledge.modeling_assumptions)
    return False


def validate_card(card: TrlCard, level: int, policy: LevelPolicy, floor: int = 0) -> CardValidationReport:
    """Report presence of every card section required up through `level`.

    `floor` supports mid-process initiation: sections owed by levels below
    it are considered pre-satisfied by the registration justification and
    are not listed. The card is graduation-ready iff nothing is missing.
    """
    validate_level(level)
    if not card.versions:
        raise ValueError("card has no versions")
    latest = card.latest()
    report = CardValidationReport(level=level)
    for section_level, section_id in policy.sections_through(level, floor=floor):
        report.checks.append(
            SectionCheck(section_id=section_id, level=section_level, present=section_present(latest, section_id))
        )
    return report


def card_versions_monotone(card: TrlCard) -> bool:
    """Append-only growth: version numbers gapless from 1, sections never lost."""
    previous_sections: set[str] = set()
    for index, version in enumerate(card.versions, start=1):
        if version.version_no != index:
            return False
        sections = version.section_ids()
        if not previous_sections <= sections:
            return False
        previous_sections = sections
    return True


def transitive_leaves(tech: Technology, registry: Mapping[str, Technology]) -> Iterable[Technology]:
    """All non-composition technologies reachable from `tech` (inclusive)."""
    seen: set[str] = set()
    stack = [tech]
    while stack:
        node = stack.pop()
        if node.id in seen:
            continue
        seen.add(node.id)
        if node.kind is TechKind.COMPOSITION:
            for component_id in node.components:
                component = registry.get(component_id)
                if component is None:
                    raise UnresolvedComponent(f"{node.id!r} references unknown component {component_id!r}")
                stack.append(component)
        else:
            yield node
