"""JSON codecs for the domain types.

Storage and wire formats share these: RFC 3339 UTC timestamps, stable field
names matching the card/event schemas, round-trip identity with the model
dataclasses. Part of the persistence layer; the in-memory types themselves
stay serialization-free.
"""

from __future__ import annotations

from datetime import datetime, timezone
from typing import Any, Mapping

from .model import (
    CardVersion,
    DeliverableRecord,
    GateCheck,
    GraduationProposal,
    ImplicitKnowledge,
    ProjectInfo,
    ProposalStatus,
    Requirement,
    ReviewOutcome,
    ReviewRecord,
    RiskEntry,
    Scorecard,
    ScorecardItem,
    SemVerTriple,
    TaskItem,
    TechKind,
    TechStatus,
    Technology,
    TransitionCause,
    TransitionEvent,
    TrlCard,
    format_semver,
    parse_semver,
)


def ts_to_text(ts: datetime) -> str:
    """RFC 3339 UTC text, 'Z' suffix, microseconds only when present."""
    ts = ts.astimezone(timezone.utc)
    if ts.microsecond:
        return ts.strftime("%Y-%m-%dT%H:%M:%S.%f") + "Z"
    return ts.strftime("%Y-%m-%dT%H:%M:%SZ")


def ts_from_text(text: str) -> datetime:
    raw = text.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    return datetime.fromisoformat(raw).astimezone(timezone.utc)


def technology_to_dict(tech: Technology) -> dict[str, Any]:
    return {
        "id": tech.id,
        "name": tech.name,
        "kind": tech.kind.value,
        "initiation_level": tech.initiation_level,
        "current_level": tech.current_level,
        "components": list(tech.components),
        "status": tech.status.value,
        "parent_id": tech.parent_id,
    }


def technology_from_dict(data: Mapping[str, Any]) -> Technology:
    return Technology(
        id=data["id"],
        name=data["name"],
        kind=TechKind(data["kind"]),
        initiation_level=data["initiation_level"],
        current_level=data["current_level"],
        components=list(data.get("components", [])),
        status=TechStatus(data.get("status", "active")),
        parent_id=data.get("parent_id"),
    )


def deliverable_to_dict(record: DeliverableRecord) -> dict[str, Any]:
    return {
        "section_id": record.section_id,
        "title": record.title,
        "uri_or_text": record.uri_or_text,
        "attached_at": ts_to_text(record.attached_at),
    }


def deliverable_from_dict(data: Mapping[str, Any]) -> DeliverableRecord:
    return DeliverableRecord(
        section_id=data["section_id"],
        title=data.get("title", ""),
        uri_or_text=data["uri_or_text"],
        attached_at=ts_from_text(data["attached_at"]),
    )


def card_version_to_dict(version: CardVersion) -> dict[str, Any]:
    info = version.project_info
    knowledge = version.implicit_knowledge
    return {
        "version_no": version.version_no,
        "created_at": ts_to_text(version.created_at),
        "annotation": version.annotation,
        "project_info": {
            "owners": list(info.owners),
            "reviewers": list(info.reviewers),
            "status": info.status,
            "code_version": format_semver(info.code_version),
            "model_version": format_semver(info.model_version),
            "data_version": format_semver(info.data_version),
        },
        "implicit_knowledge": {
            "modeling_assumptions": list(knowledge.modeling_assumptions),
            "dataset_biases": list(knowledge.dataset_biases),
            "corner_cases": list(knowledge.corner_cases),
        },
        "deliverables": {
            str(level): [deliverable_to_dict(rec) for rec in records]
            for level, records in sorted(version.deliverables.items())
        },
    }


def card_version_from_dict(data: Mapping[str, Any]) -> CardVersion:
    info = data["project_info"]
    knowledge = data["implicit_knowledge"]
    return CardVersion(
        version_no=data["version_no"],
        created_at=ts_from_text(data["created_at"]),
        annotation=data.get("annotation"),
        project_info=ProjectInfo(
            owners=list(info["owners"]),
            reviewers=list(info["reviewers"]),
            status=info["status"],
            code_version=parse_semver(info["code_version"]),
            model_version=parse_semver(info["model_version"]),
            data_version=parse_semver(info["data_version"]),
        ),
        implicit_knowledge=ImplicitKnowledge(
            modeling_assumptions=list(knowledge["modeling_assumptions"]),
            dataset_biases=list(knowledge["dataset_biases"]),
            corner_cases=list(knowledge["corner_cases"]),
        ),
        deliverables={
            int(level): [deliverable_from_dict(rec) for rec in records]
            for level, records in data.get("deliverables", {}).items()
        },
    )


def card_to_dict(card: TrlCard) -> dict[str, Any]:
    return {
        "tech_id": card.tech_id,
        "versions": [card_version_to_dict(version) for version in card.versions],
    }


def transition_to_dict(event: TransitionEvent) -> dict[str, Any]:
    return {
        "seq": event.seq,
        "tech_id": event.tech_id,
        "from_level": event.from_level,
        "to_level": event.to_level,
        "cause": event.cause.value,
        "timestamp": ts_to_text(event.timestamp),
        "review_ref": event.review_ref,
        "rationale": event.rationale,
    }


def transition_from_dict(data: Mapping[str, Any]) -> TransitionEvent:
    return TransitionEvent(
        seq=data["seq"],
        tech_id=data["tech_id"],
        from_level=data["from_level"],
        to_level=data["to_level"],
        cause=TransitionCause(data["cause"]),
        timestamp=ts_from_text(data["timestamp"]),
        review_ref=data.get("review_ref"),
        rationale=data.get("rationale", ""),
    )


def task_to_dict(task: TaskItem) -> dict[str, Any]:
    return {"description": task.description, "quantitative_remark": task.quantitative_remark}


def task_from_dict(data: Mapping[str, Any]) -> TaskItem:
    return TaskItem(description=data["description"], quantitative_remark=data.get("quantitative_remark"))


def review_to_dict(review: ReviewRecord) -> dict[str, Any]:
    return {
        "id": review.id,
        "tech_id": review.tech_id,
        "level_under_review": review.level_under_review,
        "panel": [{"person": person, "role": role} for person, role in review.panel],
        "outcome": review.outcome.value,
        "tasks": [task_to_dict(task) for task in review.tasks],
        "notes": review.notes,
        "decided_at": ts_to_text(review.decided_at) if review.decided_at else None,
        "postmortem": review.postmortem,
    }


def review_from_dict(data: Mapping[str, Any]) -> ReviewRecord:
    return ReviewRecord(
        id=data["id"],
        tech_id=data["tech_id"],
        level_under_review=data["level_under_review"],
        panel=[(entry["person"], entry["role"]) for entry in data["panel"]],
        outcome=ReviewOutcome(data["outcome"]),
        tasks=[task_from_dict(task) for task in data.get("tasks", [])],
        notes=data.get("notes", ""),
        decided_at=ts_from_text(data["decided_at"]) if data.get("decided_at") else None,
        postmortem=data.get("postmortem"),
    )


def proposal_to_dict(proposal: GraduationProposal) -> dict[str, Any]:
    return {
        "id": proposal.id,
        "tech_id": proposal.tech_id,
        "from_level": proposal.from_level,
        "card_version_at_proposal": proposal.card_version_at_proposal,
        "created_at": ts_to_text(proposal.created_at),
        "status": proposal.status.value,
    }


def proposal_from_dict(data: Mapping[str, Any]) -> GraduationProposal:
    return GraduationProposal(
        id=data["id"],
        tech_id=data["tech_id"],
        from_level=data["from_level"],
        card_version_at_proposal=data["card_version_at_proposal"],
        created_at=ts_from_text(data["created_at"]),
        status=ProposalStatus(data["status"]),
    )


def requirement_to_dict(req: Requirement) -> dict[str, Any]:
    return {
        "id": req.id,
        "tech_id": req.tech_id,
        "description": req.description,
        "verification": req.verification,
        "validation": req.validation,
        "linked_risks": list(req.linked_risks),
    }


def risk_to_dict(entry: RiskEntry) -> dict[str, Any]:
    return {
        "id": entry.id,
        "requirement_id": entry.requirement_id,
        "tech_id": entry.tech_id,
        "p_failure": entry.p_failure,
        "value": entry.value,
        "risk": entry.risk,
        "sim_to_real": entry.sim_to_real,
        "mitigation": entry.mitigation,
        "test_strategy": entry.test_strategy,
    }


def scorecard_to_dict(card: Scorecard) -> dict[str, Any]:
    return {
        "id": card.id,
        "tech_id": card.tech_id,
        "items": [
            {"item_id": item.item_id, "description": item.description, "score": item.score}
            for item in card.items
        ],
        "total": card.total,
    }


def scorecard_items_from_list(items: list[Mapping[str, Any]]) -> list[ScorecardItem]:
    return [
        ScorecardItem(item_id=item["item_id"], description=item.get("description", ""), score=item["score"])
        for item in items
    ]


def gate_check_to_dict(check: GateCheck) -> dict[str, Any]:
    return {"gate_id": check.gate_id, "satisfied": check.satisfied, "evidence": check.evidence}
