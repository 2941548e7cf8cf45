"""Command-side workflow engine.

Every state change is a command that validates against the current state
and the level policy, emits exactly one event record, and applies it to the
in-memory registry. Replay feeds stored records through the same validators
and the same apply functions, so a replayed workspace is field-for-field
identical to the live one.

Commands for one technology must be applied serially; the store's sequence
check enforces that across processes.
"""

from __future__ import annotations

import copy
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Callable, Mapping, Sequence

from . import codec, risks, rules
from .errors import (
    AlreadyArchived,
    CardIncomplete,
    ChildLevelAbovesParent,
    CompositionLevelDerived,
    CorruptLog,
    DuplicateTechnology,
    EmptyTaskListOnReturn,
    GateUnsatisfied,
    InitiationHasNoSource,
    InvalidArgument,
    InvalidLevel,
    MissingJustification,
    MissingRationale,
    NotAGraduation,
    NotAStep,
    NotLower,
    PanelRolesInsufficient,
    ParentNotFound,
    PendingProposalExists,
    PostmortemAlreadyRecorded,
    ProposalNotFound,
    ProposalNotPending,
    RequirementIncomplete,
    RequirementNotFound,
    ReviewNotFound,
    SkipNotAllowed,
    TechnologyNotFound,
    TrlError,
    UnmitigatedFlaggedRisk,
    UnresolvedComponent,
)
from .model import (
    GATE_SIM_TO_REAL_RISK,
    GATE_TEST_SCORECARD,
    GATE_WORKING_GROUP,
    CardVersion,
    DeliverableRecord,
    GateCheck,
    GraduationProposal,
    ProposalStatus,
    Requirement,
    ReviewOutcome,
    ReviewRecord,
    RiskEntry,
    Scorecard,
    ScorecardItem,
    TaskItem,
    TechKind,
    TechStatus,
    Technology,
    TransitionCause,
    TransitionEvent,
    TrlCard,
    parse_semver,
    validate_level,
)
from .policy import SECTION_SIMULATION_TESTBED, SECTION_WORKING_GROUP, LevelPolicy, default_policy
from .store import EventRecord, Workspace

# Event kinds (the `kind` field of log records).
TECH_REGISTERED = "technology-registered"
CARD_AMENDED = "card-amended"
PROPOSAL_CREATED = "proposal-created"
REVIEW_RECORDED = "review-recorded"
POSTMORTEM_RECORDED = "postmortem-recorded"
REGRESSED = "regressed"
TECH_FORKED = "technology-forked"
TECH_ARCHIVED = "technology-archived"
REQUIREMENT_ADDED = "requirement-added"
RISK_ADDED = "risk-added"
RISK_MITIGATED = "risk-mitigated"
SCORECARD_ATTACHED = "scorecard-attached"

# Card sections that route into project info / implicit knowledge instead
# of the deliverables map.
PROJECT_INFO_SECTIONS = ("owners", "reviewers", "status", "code-version", "model-version", "data-version")
IMPLICIT_KNOWLEDGE_SECTIONS = ("modeling-assumptions", "dataset-biases", "corner-cases")

_VERDICT_ERRORS = {
    rules.SKIP_NOT_ALLOWED: SkipNotAllowed,
    rules.NOT_A_STEP: NotAStep,
    rules.NOT_LOWER: NotLower,
    rules.INITIATION_HAS_NO_SOURCE: InitiationHasNoSource,
}


def _slug(name: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", name.lower()).strip("-")


@dataclass
class PortfolioState:
    """In-memory registry, fully derived from the event log."""

    technologies: dict[str, Technology] = field(default_factory=dict)
    cards: dict[str, TrlCard] = field(default_factory=dict)
    proposals: dict[str, GraduationProposal] = field(default_factory=dict)
    reviews: dict[str, ReviewRecord] = field(default_factory=dict)
    requirements: dict[str, Requirement] = field(default_factory=dict)
    risks: dict[str, RiskEntry] = field(default_factory=dict)
    scorecards: dict[str, Scorecard] = field(default_factory=dict)
    tasks: dict[str, list[TaskItem]] = field(default_factory=dict)
    transitions: list[TransitionEvent] = field(default_factory=list)
    last_seq: int = 0
    last_ts: datetime | None = None


def _utc_now() -> datetime:
    return datetime.now(timezone.utc)


class LifecycleEngine:
    """Validates commands, appends events, and keeps the derived registry."""

    def __init__(
        self,
        policy: LevelPolicy | None = None,
        store: Workspace | None = None,
        clock: Callable[[], datetime] | None = None,
    ):
        self.policy = policy or default_policy()
        self.state = PortfolioState()
        self._store = store
        self._clock = clock or _utc_now

    # ------------------------------------------------------------------
    # commands
    # ------------------------------------------------------------------

    def register_technology(
        self,
        name: str,
        kind: TechKind | str,
        initiation_level: int,
        justification: str = "",
        components: Sequence[str] = (),
        tech_id: str | None = None,
    ) -> Technology:
        kind = TechKind(kind)
        tech_id = tech_id or _slug(name)
        payload = {
            "tech_id": tech_id,
            "name": name,
            "kind": kind.value,
            "level": initiation_level,
            "justification": justification,
            "components": list(components),
        }
        record = self._commit(TECH_REGISTERED, payload)
        return self.state.technologies[record.payload["tech_id"]]

    def amend_card(
        self,
        tech_id: str,
        section: str,
        text: str,
        title: str = "",
        level: int | None = None,
    ) -> CardVersion:
        tech = self.tech(tech_id)
        if section not in PROJECT_INFO_SECTIONS + IMPLICIT_KNOWLEDGE_SECTIONS and level is None:
            level = tech.current_level
        payload = {"tech_id": tech_id, "section": section, "title": title, "text": text, "level": level}
        self._commit(CARD_AMENDED, payload)
        return self.card(tech_id).latest()

    def propose_graduation(self, tech_id: str, to_level: int | None = None) -> GraduationProposal:
        tech = self.tech(tech_id)
        if to_level is not None:
            verdict = rules.validate_transition(tech.current_level, to_level, TransitionCause.GRADUATION)
            if not verdict:
                raise _VERDICT_ERRORS[verdict.reason](
                    f"graduation {tech.current_level} -> {to_level} is illegal: {verdict.reason}"
                )
        proposal_id = f"prop-{self.state.last_seq + 1}"
        payload = {"proposal_id": proposal_id, "tech_id": tech_id}
        record = self._commit(PROPOSAL_CREATED, payload)
        return self.state.proposals[record.payload["proposal_id"]]

    def record_review(
        self,
        proposal_id: str,
        panel: Sequence[tuple[str, str]],
        outcome: ReviewOutcome | str,
        tasks: Sequence[TaskItem | Mapping[str, Any]] = (),
        notes: str = "",
    ) -> ReviewRecord:
        outcome = ReviewOutcome(outcome)
        task_items = [t if isinstance(t, TaskItem) else codec.task_from_dict(t) for t in tasks]
        review_id = f"rev-{self.state.last_seq + 1}"
        proposal = self.state.proposals.get(proposal_id)
        from_level = proposal.from_level if proposal is not None else None
        payload = {
            "review_id": review_id,
            "proposal_id": proposal_id,
            "panel": [{"person": person, "role": role} for person, role in panel],
            "outcome": outcome.value,
            "tasks": [codec.task_to_dict(task) for task in task_items],
            "notes": notes,
            # recorded facts, re-checked on replay and scannable by auditors
            "from_level": from_level,
            "to_level": from_level + 1 if outcome is ReviewOutcome.GRADUATE and from_level is not None else None,
        }
        record = self._commit(REVIEW_RECORDED, payload)
        return self.state.reviews[record.payload["review_id"]]

    def record_postmortem(self, review_id: str, notes: str) -> ReviewRecord:
        payload = {"review_id": review_id, "notes": notes}
        self._commit(POSTMORTEM_RECORDED, payload)
        return self.state.reviews[review_id]

    def regress(self, tech_id: str, to_level: int, rationale: str, review_ref: str | None = None) -> TransitionEvent:
        tech = self.state.technologies.get(tech_id)
        payload = {
            "tech_id": tech_id,
            "from_level": tech.current_level if tech is not None else None,
            "to_level": to_level,
            "rationale": rationale,
            "review_ref": review_ref,
        }
        self._commit(REGRESSED, payload)
        return self.state.transitions[-1]

    def fork_technology(
        self,
        parent_id: str,
        child_name: str,
        child_initiation_level: int,
        rationale: str = "",
        child_id: str | None = None,
    ) -> Technology:
        child_id = child_id or _slug(child_name)
        parent = self.state.technologies.get(parent_id)
        payload = {
            "parent_id": parent_id,
            "parent_level": self._fork_source_level(parent) if parent is not None else None,
            "child_id": child_id,
            "child_name": child_name,
            "child_level": child_initiation_level,
            "rationale": rationale,
        }
        record = self._commit(TECH_FORKED, payload)
        return self.state.technologies[record.payload["child_id"]]

    def archive_technology(self, tech_id: str) -> Technology:
        self._commit(TECH_ARCHIVED, {"tech_id": tech_id})
        return self.state.technologies[tech_id]

    def add_requirement(self, tech_id: str, description: str, verification: str, validation: str) -> Requirement:
        requirement_id = f"req-{self.state.last_seq + 1}"
        payload = {
            "requirement_id": requirement_id,
            "tech_id": tech_id,
            "description": description,
            "verification": verification,
            "validation": validation,
        }
        record = self._commit(REQUIREMENT_ADDED, payload)
        return self.state.requirements[record.payload["requirement_id"]]

    def add_risk(
        self,
        requirement_id: str,
        p_failure: float,
        value: int,
        sim_to_real: bool = False,
        mitigation: str | None = None,
        test_strategy: str | None = None,
    ) -> RiskEntry:
        risk_id = f"risk-{self.state.last_seq + 1}"
        payload = {
            "risk_id": risk_id,
            "requirement_id": requirement_id,
            "p_failure": p_failure,
            "value": value,
            "sim_to_real": bool(sim_to_real),
            "mitigation": mitigation,
            "test_strategy": test_strategy,
        }
        record = self._commit(RISK_ADDED, payload)
        return self.state.risks[record.payload["risk_id"]]

    def mitigate_risk(self, risk_id: str, mitigation: str, test_strategy: str | None = None) -> RiskEntry:
        payload = {"risk_id": risk_id, "mitigation": mitigation, "test_strategy": test_strategy}
        self._commit(RISK_MITIGATED, payload)
        return self.state.risks[risk_id]

    def attach_scorecard(self, tech_id: str, items: Sequence[ScorecardItem | Mapping[str, Any]]) -> Scorecard:
        normalized = [
            item
            if isinstance(item, ScorecardItem)
            else ScorecardItem(item_id=item["item_id"], description=item.get("description", ""), score=item["score"])
            for item in items
        ]
        scorecard_id = f"sc-{self.state.last_seq + 1}"
        payload = {
            "scorecard_id": scorecard_id,
            "tech_id": tech_id,
            "items": [
                {"item_id": item.item_id, "description": item.description, "score": item.score}
                for item in normalized
            ],
        }
        record = self._commit(SCORECARD_ATTACHED, payload)
        return self.state.scorecards[record.payload["scorecard_id"]]

    # ------------------------------------------------------------------
    # queries
    # ------------------------------------------------------------------

    def tech(self, tech_id: str) -> Technology:
        tech = self.state.technologies.get(tech_id)
        if tech is None:
            raise TechnologyNotFound(f"unknown technology {tech_id!r}")
        return tech

    def card(self, tech_id: str) -> TrlCard:
        self.tech(tech_id)
        return self.state.cards[tech_id]

    def transitions_for(self, tech_id: str) -> list[TransitionEvent]:
        return [event for event in self.state.transitions if event.tech_id == tech_id]

    def events_by_tech(self) -> dict[str, list[TransitionEvent]]:
        grouped: dict[str, list[TransitionEvent]] = {}
        for event in self.state.transitions:
            grouped.setdefault(event.tech_id, []).append(event)
        return grouped

    def pending_proposal(self, tech_id: str) -> GraduationProposal | None:
        for proposal in self.state.proposals.values():
            if proposal.tech_id == tech_id and proposal.status is ProposalStatus.PENDING:
                return proposal
        return None

    def system_trl_of(self, tech_id: str) -> int:
        return rules.system_trl(self.tech(tech_id), self.state.technologies)

    def requirements_for(self, tech_id: str) -> list[Requirement]:
        self.tech(tech_id)
        return [req for req in self.state.requirements.values() if req.tech_id == tech_id]

    def risks_for(self, tech_id: str) -> list[RiskEntry]:
        self.tech(tech_id)
        return [entry for entry in self.state.risks.values() if entry.tech_id == tech_id]

    def flagged_risks(self, tech_id: str, threshold: float | None = None) -> list[RiskEntry]:
        cutoff = self.policy.flag_threshold if threshold is None else threshold
        return risks.flagged_risks(self.risks_for(tech_id), cutoff)

    def scorecards_for(self, tech_id: str) -> list[Scorecard]:
        self.tech(tech_id)
        return [card for card in self.state.scorecards.values() if card.tech_id == tech_id]

    def tasks_for(self, tech_id: str) -> list[TaskItem]:
        self.tech(tech_id)
        return list(self.state.tasks.get(tech_id, []))

    def level_floor(self, tech_id: str) -> int:
        """Lowest level this technology has ever occupied; sections owed by
        levels below it are pre-satisfied by the initiation justification."""
        levels = [event.to_level for event in self.transitions_for(tech_id)]
        return min(levels) if levels else self.tech(tech_id).initiation_level

    def readiness(self, tech_id: str) -> rules.CardValidationReport:
        tech = self.tech(tech_id)
        return rules.validate_card(
            self.card(tech_id), tech.current_level, self.policy, floor=self.level_floor(tech_id)
        )

    def gate_checks(self, tech_id: str) -> list[GateCheck]:
        tech = self.tech(tech_id)
        version = self.card(tech_id).latest()
        return [
            self._evaluate_gate(tech, version, gate_id)
            for gate_id in self.policy.gates_for_exit(tech.current_level)
        ]

    # ------------------------------------------------------------------
    # gate evaluation
    # ------------------------------------------------------------------

    def _evaluate_gate(self, tech: Technology, version: CardVersion, gate_id: str) -> GateCheck:
        if gate_id == GATE_SIM_TO_REAL_RISK:
            if not _declares_sim_testbed(version):
                return GateCheck(gate_id, True, "no simulation or surrogate testbed declared at level 2")
            entries = [
                entry
                for entry in self.risks_for(tech.id)
                if entry.sim_to_real and (entry.test_strategy or "").strip()
            ]
            if entries:
                ids = ", ".join(sorted(entry.id for entry in entries))
                return GateCheck(gate_id, True, f"sim-to-real risk entries with test strategies: {ids}")
            return GateCheck(gate_id, False, "")
        if gate_id == GATE_TEST_SCORECARD:
            cards = self.scorecards_for(tech.id)
            if cards and cards[-1].items:
                latest = cards[-1]
                return GateCheck(gate_id, True, f"scorecard {latest.id}, total {latest.total}")
            return GateCheck(gate_id, False, "")
        if gate_id == GATE_WORKING_GROUP:
            roles = {
                record.title.strip()
                for record in version.records_for_section(SECTION_WORKING_GROUP)
                if record.title.strip()
            }
            if len(roles) >= self.policy.working_group_min_roles:
                return GateCheck(gate_id, True, f"working group roles: {', '.join(sorted(roles))}")
            return GateCheck(gate_id, False, "")
        # Remaining gates (requirements-doc, ethics-review, assumptions-and-
        # limitations, org-defined ids) are satisfied by a card section of
        # the same name.
        if rules.section_present(version, gate_id):
            return GateCheck(gate_id, True, f"card section {gate_id}")
        return GateCheck(gate_id, False, "")

    # ------------------------------------------------------------------
    # commit pipeline
    # ------------------------------------------------------------------

    def _commit(self, kind: str, payload: dict[str, Any]) -> EventRecord:
        ts = self._clock()
        if self.state.last_ts is not None and ts < self.state.last_ts:
            ts = self.state.last_ts
        record = EventRecord(seq=self.state.last_seq + 1, ts=ts, kind=kind, payload=payload)
        _VALIDATORS[kind](self, record)
        if self._store is not None:
            self._store.append_event(record)
        effects = _APPLIERS[kind](self, record)
        self.state.last_seq = record.seq
        self.state.last_ts = record.ts
        if self._store is not None:
            for tech_id, version in effects:
                self._store.save_card_version(tech_id, version)
        return record

    def apply_record(self, record: EventRecord) -> None:
        """Replay path: re-validate and apply one stored record."""
        if record.seq != self.state.last_seq + 1:
            raise CorruptLog(
                f"expected seq {self.state.last_seq + 1}, got {record.seq}", seq=record.seq
            )
        validator = _VALIDATORS.get(record.kind)
        if validator is None:
            raise CorruptLog(f"unknown event kind {record.kind!r} at seq {record.seq}", seq=record.seq)
        try:
            validator(self, record)
            _APPLIERS[record.kind](self, record)
        except TrlError as exc:
            if isinstance(exc, CorruptLog):
                raise
            raise CorruptLog(f"invalid record at seq {record.seq}: {exc}", seq=record.seq) from exc
        except (KeyError, TypeError, ValueError) as exc:
            raise CorruptLog(f"malformed payload at seq {record.seq}: {exc}", seq=record.seq) from exc
        self.state.last_seq = record.seq
        self.state.last_ts = record.ts

    # ------------------------------------------------------------------
    # validators (shared by live commands and replay)
    # ------------------------------------------------------------------

    def _validate_register(self, record: EventRecord) -> None:
        payload = record.payload
        tech_id = payload["tech_id"]
        if not tech_id:
            raise InvalidArgument("technology name must produce a non-empty id")
        if tech_id in self.state.technologies:
            raise DuplicateTechnology(f"technology id {tech_id!r} already registered")
        kind = TechKind(payload["kind"])
        level = payload["level"]
        validate_level(level)
        if level > 0 and not payload["justification"].strip():
            raise MissingJustification(
                f"initiation at level {level} must explain why levels below are pre-satisfied"
            )
        components = payload["components"]
        if kind is TechKind.COMPOSITION:
            if not components:
                raise InvalidArgument("a composition needs at least one component")
            for component_id in components:
                if component_id not in self.state.technologies:
                    raise UnresolvedComponent(f"unknown component {component_id!r}")
        elif components:
            raise InvalidArgument(f"{kind.value} technologies cannot list components")

    def _validate_card_amend(self, record: EventRecord) -> None:
        payload = record.payload
        self.tech(payload["tech_id"])
        section = payload["section"]
        if not section or not str(section).strip():
            raise InvalidArgument("section id must be non-empty")
        text = payload["text"]
        if section in ("code-version", "model-version", "data-version"):
            parse_semver(text)
        elif section in PROJECT_INFO_SECTIONS:
            pass  # owners/reviewers/status accept any text, including empty
        elif section in IMPLICIT_KNOWLEDGE_SECTIONS:
            if not str(text).strip():
                raise InvalidArgument(f"text for section {section!r} must be non-empty")
        else:
            if not str(text).strip():
                raise InvalidArgument(f"text for section {section!r} must be non-empty")
            validate_level(payload["level"])

    def _validate_proposal(self, record: EventRecord) -> None:
        payload = record.payload
        tech = self.tech(payload["tech_id"])
        if payload["proposal_id"] in self.state.proposals:
            raise DuplicateTechnology(f"proposal id {payload['proposal_id']!r} already used")
        if tech.kind is TechKind.COMPOSITION:
            raise CompositionLevelDerived(
                f"{tech.id!r} is a composition; its level follows its components"
            )
        if tech.current_level >= 9:
            raise InvalidLevel(f"{tech.id!r} is already at the top level")
        if self.pending_proposal(tech.id) is not None:
            raise PendingProposalExists(f"{tech.id!r} already has a pending proposal")
        report = self.readiness(tech.id)
        if not report.graduation_ready:
            raise CardIncomplete(
                f"card is missing sections: {', '.join(report.missing)}", missing=report.missing
            )
        unsatisfied = [check.gate_id for check in self.gate_checks(tech.id) if not check.satisfied]
        if unsatisfied:
            raise GateUnsatisfied(
                f"gates unsatisfied: {', '.join(unsatisfied)}", gates=unsatisfied
            )
        unmitigated = risks.unmitigated_flagged(self.risks_for(tech.id), self.policy.flag_threshold)
        if unmitigated:
            ids = [entry.id for entry in unmitigated]
            raise UnmitigatedFlaggedRisk(
                f"flagged risks lack mitigations: {', '.join(ids)}", risk_ids=ids
            )

    def _validate_review(self, record: EventRecord) -> None:
        payload = record.payload
        proposal = self.state.proposals.get(payload["proposal_id"])
        if proposal is None:
            raise ProposalNotFound(f"unknown proposal {payload['proposal_id']!r}")
        if proposal.status is not ProposalStatus.PENDING:
            raise ProposalNotPending(f"proposal {proposal.id!r} is {proposal.status.value}")
        tech = self.tech(proposal.tech_id)
        if proposal.from_level != tech.current_level:
            raise TrlError(
                f"proposal {proposal.id!r} was made at level {proposal.from_level}, "
                f"technology is now at {tech.current_level}"
            )
        if payload["from_level"] != proposal.from_level:
            raise TrlError(
                f"recorded from_level {payload['from_level']} does not match proposal level {proposal.from_level}"
            )
        outcome = ReviewOutcome(payload["outcome"])
        if outcome is ReviewOutcome.GRADUATE:
            required = set(self.policy.rule(proposal.from_level).required_panel_roles)
            present = {entry["role"] for entry in payload["panel"]}
            missing = sorted(required - present)
            if missing:
                raise PanelRolesInsufficient(
                    f"panel lacks required roles: {', '.join(missing)}", roles=missing
                )
            verdict = rules.validate_transition(
                proposal.from_level, payload["to_level"], TransitionCause.GRADUATION
            )
            if not verdict:
                raise _VERDICT_ERRORS[verdict.reason]("graduation target is illegal")
        else:
            tasks = [t for t in payload["tasks"] if str(t.get("description", "")).strip()]
            if not tasks:
                raise EmptyTaskListOnReturn("a Return outcome must list at least one task")

    def _validate_postmortem(self, record: EventRecord) -> None:
        payload = record.payload
        review = self.state.reviews.get(payload["review_id"])
        if review is None:
            raise ReviewNotFound(f"unknown review {payload['review_id']!r}")
        if review.outcome is not ReviewOutcome.GRADUATE:
            raise NotAGraduation(f"review {review.id!r} did not graduate")
        if review.postmortem is not None:
            raise PostmortemAlreadyRecorded(f"review {review.id!r} already has a post-mortem")

    def _validate_regress(self, record: EventRecord) -> None:
        payload = record.payload
        tech = self.tech(payload["tech_id"])
        if tech.kind is TechKind.COMPOSITION:
            raise CompositionLevelDerived(
                f"{tech.id!r} is a composition; regress its components instead"
            )
        if not str(payload["rationale"]).strip():
            raise MissingRationale("a regression must state its rationale")
        if payload["from_level"] != tech.current_level:
            raise TrlError(
                f"recorded from_level {payload['from_level']} does not match current level {tech.current_level}"
            )
        to_level = payload["to_level"]
        verdict = rules.validate_transition(tech.current_level, to_level, TransitionCause.REGRESSION)
        if not verdict:
            raise NotLower(f"regression target {to_level} is not below {tech.current_level}")

    def _validate_fork(self, record: EventRecord) -> None:
        payload = record.payload
        parent = self.state.technologies.get(payload["parent_id"])
        if parent is None:
            raise ParentNotFound(f"unknown parent {payload['parent_id']!r}")
        child_id = payload["child_id"]
        if not child_id:
            raise InvalidArgument("child name must produce a non-empty id")
        if child_id in self.state.technologies:
            raise DuplicateTechnology(f"technology id {child_id!r} already registered")
        child_level = payload["child_level"]
        validate_level(child_level)
        source = self._fork_source_level(parent)
        if payload["parent_level"] != source:
            raise TrlError(
                f"recorded parent_level {payload['parent_level']} does not match parent's level {source}"
            )
        if child_level > source:
            raise ChildLevelAbovesParent(f"child cannot start at {child_level}, parent is at {source}")

    def _fork_source_level(self, parent: Technology) -> int:
        if parent.kind is TechKind.COMPOSITION:
            return rules.system_trl(parent, self.state.technologies)
        return parent.current_level

    def _validate_archive(self, record: EventRecord) -> None:
        tech = self.tech(record.payload["tech_id"])
        if tech.status is TechStatus.ARCHIVED:
            raise AlreadyArchived(f"{tech.id!r} is already archived")

    def _validate_requirement(self, record: EventRecord) -> None:
        payload = record.payload
        self.tech(payload["tech_id"])
        for field_name in ("description", "verification", "validation"):
            if not str(payload[field_name]).strip():
                raise RequirementIncomplete(f"requirement {field_name} must be non-empty")

    def _validate_risk(self, record: EventRecord) -> None:
        payload = record.payload
        requirement = self.state.requirements.get(payload["requirement_id"])
        if requirement is None:
            raise RequirementNotFound(f"unknown requirement {payload['requirement_id']!r}")
        risks.risk_score(payload["p_failure"], payload["value"])

    def _validate_mitigation(self, record: EventRecord) -> None:
        payload = record.payload
        if payload["risk_id"] not in self.state.risks:
            raise RiskNotFound(f"unknown risk entry {payload['risk_id']!r}")
        if not str(payload["mitigation"]).strip():
            raise InvalidArgument("mitigation text must be non-empty")

    def _validate_scorecard(self, record: EventRecord) -> None:
        payload = record.payload
        self.tech(payload["tech_id"])
        items = codec.scorecard_items_from_list(payload["items"])
        risks.validate_scores(items, self.policy.scorecard_item_max)

    # ------------------------------------------------------------------
    # appliers (infallible once validated; return new card versions)
    # ------------------------------------------------------------------

    def _apply_register(self, record: EventRecord) -> list[tuple[str, CardVersion]]:
        payload = record.payload
        tech = Technology(
            id=payload["tech_id"],
            name=payload["name"],
            kind=TechKind(payload["kind"]),
            initiation_level=payload["level"],
            current_level=payload["level"],
            components=list(payload["components"]),
        )
        self.state.technologies[tech.id] = tech
        self.state.transitions.append(
            TransitionEvent(
                seq=record.seq,
                tech_id=tech.id,
                from_level=None,
                to_level=tech.initiation_level,
                cause=TransitionCause.INITIATION,
                timestamp=record.ts,
                rationale=payload["justification"],
            )
        )
        first = CardVersion(version_no=1, created_at=record.ts)
        self.state.cards[tech.id] = TrlCard(tech_id=tech.id, versions=[first])
        return [(tech.id, first)]

    def _apply_card_amend(self, record: EventRecord) -> list[tuple[str, CardVersion]]:
        payload = record.payload
        card = self.state.cards[payload["tech_id"]]
        version = _bump(card.latest(), record.ts)
        section, text, title = payload["section"], payload["text"], payload["title"]
        info, knowledge = version.project_info, version.implicit_knowledge
        if section == "owners":
            info.owners = _split_ids(text)
        elif section == "reviewers":
            info.reviewers = _split_ids(text)
        elif section == "status":
            info.status = text
        elif section == "code-version":
            info.code_version = parse_semver(text)
        elif section == "model-version":
            info.model_version = parse_semver(text)
        elif section == "data-version":
            info.data_version = parse_semver(text)
        elif section == "modeling-assumptions":
            knowledge.modeling_assumptions.append(text)
        elif section == "dataset-biases":
            knowledge.dataset_biases.append(text)
        elif section == "corner-cases":
            knowledge.corner_cases.append(text)
        else:
            version.deliverables.setdefault(payload["level"], []).append(
                DeliverableRecord(section_id=section, title=title, uri_or_text=text, attached_at=record.ts)
            )
        card.versions.append(version)
        return [(card.tech_id, version)]

    def _apply_proposal(self, record: EventRecord) -> list[tuple[str, CardVersion]]:
        payload = record.payload
        tech = self.state.technologies[payload["tech_id"]]
        card = self.state.cards[tech.id]
        self.state.proposals[payload["proposal_id"]] = GraduationProposal(
            id=payload["proposal_id"],
            tech_id=tech.id,
            from_level=tech.current_level,
            card_version_at_proposal=card.latest().version_no,
            created_at=record.ts,
        )
        return []

    def _apply_review(self, record: EventRecord) -> list[tuple[str, CardVersion]]:
        payload = record.payload
        proposal = self.state.proposals[payload["proposal_id"]]
        tech = self.state.technologies[proposal.tech_id]
        outcome = ReviewOutcome(payload["outcome"])
        review = ReviewRecord(
            id=payload["review_id"],
            tech_id=tech.id,
            level_under_review=proposal.from_level,
            panel=[(entry["person"], entry["role"]) for entry in payload["panel"]],
            outcome=outcome,
            tasks=[codec.task_from_dict(task) for task in payload["tasks"]],
            notes=payload["notes"],
            decided_at=record.ts,
        )
        self.state.reviews[review.id] = review
        proposal.status = ProposalStatus.DECIDED
        if outcome is ReviewOutcome.RETURN:
            self.state.tasks.setdefault(tech.id, []).extend(review.tasks)
            return []
        target = proposal.from_level + 1
        self.state.transitions.append(
            TransitionEvent(
                seq=record.seq,
                tech_id=tech.id,
                from_level=proposal.from_level,
                to_level=target,
                cause=TransitionCause.GRADUATION,
                timestamp=record.ts,
                review_ref=review.id,
                rationale=payload["notes"],
            )
        )
        tech.current_level = target
        card = self.state.cards[tech.id]
        version = _bump(
            card.latest(), record.ts, annotation=f"graduated to level {target} (review {review.id})"
        )
        card.versions.append(version)
        return [(tech.id, version)]

    def _apply_postmortem(self, record: EventRecord) -> list[tuple[str, CardVersion]]:
        self.state.reviews[record.payload["review_id"]].postmortem = record.payload["notes"]
        return []

    def _apply_regress(self, record: EventRecord) -> list[tuple[str, CardVersion]]:
        payload = record.payload
        tech = self.state.technologies[payload["tech_id"]]
        self.state.transitions.append(
            TransitionEvent(
                seq=record.seq,
                tech_id=tech.id,
                from_level=tech.current_level,
                to_level=payload["to_level"],
                cause=TransitionCause.REGRESSION,
                timestamp=record.ts,
                review_ref=payload.get("review_ref"),
                rationale=payload["rationale"],
            )
        )
        tech.current_level = payload["to_level"]
        pending = self.pending_proposal(tech.id)
        if pending is not None:
            pending.status = ProposalStatus.CANCELLED
        return []

    def _apply_fork(self, record: EventRecord) -> list[tuple[str, CardVersion]]:
        payload = record.payload
        parent = self.state.technologies[payload["parent_id"]]
        child = Technology(
            id=payload["child_id"],
            name=payload["child_name"],
            kind=parent.kind,
            initiation_level=payload["child_level"],
            current_level=payload["child_level"],
            components=list(parent.components),
            parent_id=parent.id,
        )
        self.state.technologies[child.id] = child
        self.state.transitions.append(
            TransitionEvent(
                seq=record.seq,
                tech_id=child.id,
                from_level=self._fork_source_level(parent),
                to_level=child.initiation_level,
                cause=TransitionCause.FORK_CHILD_CREATED,
                timestamp=record.ts,
                rationale=payload["rationale"],
            )
        )
        first = CardVersion(
            version_no=1,
            created_at=record.ts,
            implicit_knowledge=copy.deepcopy(self.state.cards[parent.id].latest().implicit_knowledge),
            annotation=f"forked from {parent.id}",
        )
        self.state.cards[child.id] = TrlCard(tech_id=child.id, versions=[first])
        return [(child.id, first)]

    def _apply_archive(self, record: EventRecord) -> list[tuple[str, CardVersion]]:
        self.state.technologies[record.payload["tech_id"]].status = TechStatus.ARCHIVED
        return []

    def _apply_requirement(self, record: EventRecord) -> list[tuple[str, CardVersion]]:
        payload = record.payload
        self.state.requirements[payload["requirement_id"]] = Requirement(
            id=payload["requirement_id"],
            tech_id=payload["tech_id"],
            description=payload["description"],
            verification=payload["verification"],
            validation=payload["validation"],
        )
        return []

    def _apply_risk(self, record: EventRecord) -> list[tuple[str, CardVersion]]:
        payload = record.payload
        requirement = self.state.requirements[payload["requirement_id"]]
        entry = RiskEntry(
            id=payload["risk_id"],
            requirement_id=requirement.id,
            tech_id=requirement.tech_id,
            p_failure=float(payload["p_failure"]),
            value=payload["value"],
            risk=risks.risk_score(payload["p_failure"], payload["value"]),
            sim_to_real=payload["sim_to_real"],
            mitigation=payload.get("mitigation"),
            test_strategy=payload.get("test_strategy"),
        )
        self.state.risks[entry.id] = entry
        requirement.linked_risks.append(entry.id)
        return []

    def _apply_scorecard(self, record: EventRecord) -> list[tuple[str, CardVersion]]:
        payload = record.payload
        self.state.scorecards[payload["scorecard_id"]] = Scorecard(
            id=payload["scorecard_id"],
            tech_id=payload["tech_id"],
            items=codec.scorecard_items_from_list(payload["items"]),
        )
        return []


def _bump(version: CardVersion, ts: datetime, annotation: str | None = None) -> CardVersion:
    successor = copy.deepcopy(version)
    successor.version_no = version.version_no + 1
    successor.created_at = ts
    successor.annotation = annotation
    return successor


def _split_ids(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _declares_sim_testbed(version: CardVersion) -> bool:
    """Level-2 evidence of a simulated or surrogate testbed."""
    for record in version.deliverables.get(2, []):
        if record.section_id == SECTION_SIMULATION_TESTBED:
            return True
        blob = f"{record.title} {record.uri_or_text}".lower()
        if "simulat" in blob or "surrogate" in blob:
            return True
    return False


_VALIDATORS: dict[str, Callable[[LifecycleEngine, EventRecord], None]] = {
    TECH_REGISTERED: LifecycleEngine._validate_register,
    CARD_AMENDED: LifecycleEngine._validate_card_amend,
    PROPOSAL_CREATED: LifecycleEngine._validate_proposal,
    REVIEW_RECORDED: LifecycleEngine._validate_review,
    POSTMORTEM_RECORDED: LifecycleEngine._validate_postmortem,
    REGRESSED: LifecycleEngine._validate_regress,
    TECH_FORKED: LifecycleEngine._validate_fork,
    TECH_ARCHIVED: LifecycleEngine._validate_archive,
    REQUIREMENT_ADDED: LifecycleEngine._validate_requirement,
    RISK_ADDED: LifecycleEngine._validate_risk,
    SCORECARD_ATTACHED: LifecycleEngine._validate_scorecard,
}

_APPLIERS: dict[str, Callable[[LifecycleEngine, EventRecord], list[tuple[str, CardVersion]]]] = {
    TECH_REGISTERED: LifecycleEngine._apply_register,
    CARD_AMENDED: LifecycleEngine._apply_card_amend,
    PROPOSAL_CREATED: LifecycleEngine._apply_proposal,
    REVIEW_RECORDED: LifecycleEngine._apply_review,
    POSTMORTEM_RECORDED: LifecycleEngine._apply_postmortem,
    REGRESSED: LifecycleEngine._apply_regress,
    TECH_FORKED: LifecycleEngine._apply_fork,
    TECH_ARCHIVED: LifecycleEngine._apply_archive,
    REQUIREMENT_ADDED: LifecycleEngine._apply_requirement,
    RISK_ADDED: LifecycleEngine._apply_risk,
    SCORECARD_ATTACHED: LifecycleEngine._apply_scorecard,
}


def open_engine(workspace: Workspace, clock: Callable[[], datetime] | None = None) -> LifecycleEngine:
    """Replay a workspace's log into a live engine attached to it."""
    engine = LifecycleEngine(policy=workspace.load_policy(), store=workspace, clock=clock)
    for record in workspace.read_events():
        engine.apply_record(record)
    return engine
