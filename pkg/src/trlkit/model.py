"""Domain types: levels, technologies, cards, transitions, reviews, risks.

Pure value objects with no I/O. Serialization to and from JSON-safe dicts
lives in the store module; rule evaluation lives in ``rules``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum

from .errors import InvalidLevel, MalformedVersion

MIN_LEVEL = 0
MAX_LEVEL = 9
ALL_LEVELS = tuple(range(MIN_LEVEL, MAX_LEVEL + 1))


def validate_level(value: int) -> int:
    """Return `value` if it is a readiness level, else raise InvalidLevel."""
    if not isinstance(value, int) or isinstance(value, bool) or not MIN_LEVEL <= value <= MAX_LEVEL:
        raise InvalidLevel(f"readiness level must be an integer in 0-9, got {value!r}")
    return value


class TechKind(str, Enum):
    MODEL = "model"
    ALGORITHM = "algorithm"
    DATA_PIPELINE = "data-pipeline"
    SOFTWARE_MODULE = "software-module"
    COMPOSITION = "composition"


class TechStatus(str, Enum):
    ACTIVE = "active"
    ARCHIVED = "archived"


class TransitionCause(str, Enum):
    INITIATION = "initiation"
    GRADUATION = "graduation"
    REGRESSION = "regression"
    FORK_CHILD_CREATED = "fork-child-created"


class ProposalStatus(str, Enum):
    PENDING = "pending"
    DECIDED = "decided"
    CANCELLED = "cancelled"


class ReviewOutcome(str, Enum):
    GRADUATE = "graduate"
    RETURN = "return"


_SEMVER_RE = re.compile(r"^(0|[1-9][0-9]*)\.(0|[1-9][0-9]*)\.(0|[1-9][0-9]*)$")


@dataclass(frozen=True)
class SemVerTriple:
    major: int
    minor: int
    patch: int

    def __post_init__(self) -> None:
        for part in (self.major, self.minor, self.patch):
            if not isinstance(part, int) or isinstance(part, bool) or part < 0:
                raise MalformedVersion(f"version components must be non-negative integers, got {part!r}")


def parse_semver(text: str) -> SemVerTriple:
    """Parse "M.m.p" into a triple; raise MalformedVersion otherwise."""
    if not isinstance(text, str):
        raise MalformedVersion(f"expected version text, got {type(text).__name__}")
    match = _SEMVER_RE.match(text.strip())
    if match is None:
        raise MalformedVersion(f"not a M.m.p version: {text!r}")
    return SemVerTriple(int(match.group(1)), int(match.group(2)), int(match.group(3)))


def format_semver(version: SemVerTriple) -> str:
    return f"{version.major}.{version.minor}.{version.patch}"


@dataclass
class Technology:
    """A tracked unit of work with a readiness level.

    `current_level` is derived from the event history by the lifecycle
    engine; it is carried here for convenient reads, never persisted as
    authoritative state. `components` is non-empty iff kind=composition.
    """

    id: str
    name: str
    kind: TechKind
    initiation_level: int
    current_level: int
    components: list[str] = field(default_factory=list)
    status: TechStatus = TechStatus.ACTIVE
    parent_id: str | None = None


@dataclass
class DeliverableRecord:
    section_id: str
    title: str
    uri_or_text: str
    attached_at: datetime


@dataclass
class ProjectInfo:
    owners: list[str] = field(default_factory=list)
    reviewers: list[str] = field(default_factory=list)
    status: str = "in-development"
    code_version: SemVerTriple = SemVerTriple(0, 1, 0)
    model_version: SemVerTriple = SemVerTriple(0, 1, 0)
    data_version: SemVerTriple = SemVerTriple(0, 1, 0)


@dataclass
class ImplicitKnowledge:
    """Insights that tend to stay siloed with the builders and must travel."""

    modeling_assumptions: list[str] = field(default_factory=list)
    dataset_biases: list[str] = field(default_factory=list)
    corner_cases: list[str] = field(default_factory=list)


@dataclass
class CardVersion:
    version_no: int
    created_at: datetime
    project_info: ProjectInfo = field(default_factory=ProjectInfo)
    implicit_knowledge: ImplicitKnowledge = field(default_factory=ImplicitKnowledge)
    deliverables: dict[int, list[DeliverableRecord]] = field(default_factory=dict)
    annotation: str | None = None

    def section_ids(self) -> set[str]:
        return {rec.section_id for records in self.deliverables.values() for rec in records}

    def records_for_section(self, section_id: str) -> list[DeliverableRecord]:
        return [rec for records in self.deliverables.values() for rec in records if rec.section_id == section_id]


@dataclass
class TrlCard:
    """Append-only versioned report card for one technology."""

    tech_id: str
    versions: list[CardVersion] = field(default_factory=list)

    def latest(self) -> CardVersion:
        return self.versions[-1]


@dataclass
class TransitionEvent:
    seq: int
    tech_id: str
    from_level: int | None
    to_level: int
    cause: TransitionCause
    timestamp: datetime
    review_ref: str | None = None
    rationale: str = ""


@dataclass
class TaskItem:
    description: str
    quantitative_remark: str | None = None


@dataclass
class ReviewRecord:
    id: str
    tech_id: str
    level_under_review: int
    panel: list[tuple[str, str]]  # (person id, role id)
    outcome: ReviewOutcome
    tasks: list[TaskItem] = field(default_factory=list)
    notes: str = ""
    decided_at: datetime | None = None
    postmortem: str | None = None


@dataclass
class GraduationProposal:
    id: str
    tech_id: str
    from_level: int
    card_version_at_proposal: int
    created_at: datetime
    status: ProposalStatus = ProposalStatus.PENDING


# Well-known gate identifiers. The set is open: policies may add their own
# (the default policy adds working-group for the level-5 handoff rule).
GATE_REQUIREMENTS_DOC = "requirements-doc"
GATE_ASSUMPTIONS_AND_LIMITATIONS = "assumptions-and-limitations"
GATE_ETHICS_REVIEW = "ethics-review"
GATE_SIM_TO_REAL_RISK = "sim-to-real-risk"
GATE_TEST_SCORECARD = "test-scorecard"
GATE_WORKING_GROUP = "working-group"


@dataclass
class GateCheck:
    """Evaluation of one graduation gate. satisfied=True implies evidence."""

    gate_id: str
    satisfied: bool
    evidence: str = ""


@dataclass
class Requirement:
    id: str
    tech_id: str
    description: str
    verification: str
    validation: str
    linked_risks: list[str] = field(default_factory=list)


@dataclass
class RiskEntry:
    id: str
    requirement_id: str
    tech_id: str
    p_failure: float
    value: int
    risk: float
    sim_to_real: bool = False
    mitigation: str | None = None
    test_strategy: str | None = None


@dataclass
class ScorecardItem:
    item_id: str
    description: str
    score: int


@dataclass
class Scorecard:
    id: str
    tech_id: str
    items: list[ScorecardItem] = field(default_factory=list)

    @property
    def total(self) -> int:
        return sum(item.score for item in self.items)
