"""HTTP adapter over the lifecycle engine.

Every endpoint delegates to the corresponding domain operation and
serializes its result; no business logic lives here. Domain errors map to
one (status, code) pair each. Mutating endpoints are serialized per
workspace and optionally guarded by a static bearer token (`TRL_TOKEN`).

Read endpoints are deterministic: analytics close open intervals at the
log's last event timestamp unless the caller passes an explicit `now`, so
repeated GETs without writes return byte-identical bodies.
"""

from __future__ import annotations

import os
import threading
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from fastapi import Body, FastAPI, Query, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import analytics, codec, errors
from .lifecycle import LifecycleEngine, open_engine
from .model import Technology
from .store import Workspace

API_PREFIX = "/api/v1"

_STATUS_BY_CODE: dict[str, int] = {
    # 404 unknown identifiers
    "TechnologyNotFound": 404,
    "ParentNotFound": 404,
    "ProposalNotFound": 404,
    "ReviewNotFound": 404,
    "RequirementNotFound": 404,
    "CardNotFound": 404,
    # 409 conflicts with current state
    "PendingProposalExists": 409,
    "SequenceConflict": 409,
    "ProposalNotPending": 409,
    "PostmortemAlreadyRecorded": 409,
    "AlreadyArchived": 409,
    "DuplicateTechnology": 409,
    # 422 gate/card/panel failures
    "CardIncomplete": 422,
    "GateUnsatisfied": 422,
    "UnmitigatedFlaggedRisk": 422,
    "PanelRolesInsufficient": 422,
    "ChildLevelAbovesParent": 422,
    "CompositionLevelDerived": 422,
    "NotAGraduation": 422,
    # 500 storage faults
    "StorageFailure": 500,
    "CorruptLog": 500,
    "VersionGap": 500,
    # auth
    "Unauthorized": 401,
}
_DEFAULT_STATUS = 400  # remaining domain errors are caller validation faults


def _error_response(exc: errors.TrlError) -> JSONResponse:
    status = _STATUS_BY_CODE.get(exc.code, _DEFAULT_STATUS)
    body = {"code": exc.code, "message": exc.message}
    if exc.details:
        body["details"] = {k: v for k, v in exc.details.items() if v is not None}
    return JSONResponse(status_code=status, content=body)


def _parse_now(raw: str | None, engine: LifecycleEngine) -> datetime:
    if raw:
        return codec.ts_from_text(raw)
    if engine.state.last_ts is not None:
        return engine.state.last_ts
    return datetime.now(timezone.utc)


def _tech_summary(engine: LifecycleEngine, tech: Technology) -> dict[str, Any]:
    pending = engine.pending_proposal(tech.id)
    return {
        **codec.technology_to_dict(tech),
        "system_trl": engine.system_trl_of(tech.id),
        "pending_proposal": pending.id if pending else None,
        "flagged_risk_count": len(engine.flagged_risks(tech.id)),
        "open_task_count": len(engine.tasks_for(tech.id)),
    }


def create_app(
    workspace_root: str | Path,
    static_dir: str | Path | None = None,
    token: str | None = None,
) -> FastAPI:
    workspace = Workspace(workspace_root)
    engine = open_engine(workspace)
    write_lock = threading.Lock()
    token = token if token is not None else os.environ.get("TRL_TOKEN") or None

    app = FastAPI(title="trlkit", docs_url=None, redoc_url=None, openapi_url=None)

    @app.exception_handler(errors.TrlError)
    async def handle_domain_error(_request: Request, exc: errors.TrlError) -> JSONResponse:
        return _error_response(exc)

    def authorize(request: Request) -> None:
        if token is None:
            return
        header = request.headers.get("authorization", "")
        if header != f"Bearer {token}":
            raise errors.Unauthorized("missing or invalid bearer token")

    # -- technologies --------------------------------------------------

    @app.post(API_PREFIX + "/technologies")
    def register(request: Request, body: dict = Body(...)):
        authorize(request)
        with write_lock:
            tech = engine.register_technology(
                name=body.get("name", ""),
                kind=body.get("kind", ""),
                initiation_level=body.get("initiation_level", body.get("level")),
                justification=body.get("justification", ""),
                components=body.get("components", []),
                tech_id=body.get("id"),
            )
            return _tech_summary(engine, tech)

    @app.get(API_PREFIX + "/technologies")
    def list_technologies(level: int | None = Query(None), kind: str | None = Query(None)):
        rows = []
        for tech in engine.state.technologies.values():
            if level is not None and tech.current_level != level:
                continue
            if kind is not None and tech.kind.value != kind:
                continue
            rows.append(_tech_summary(engine, tech))
        return {"technologies": rows}

    @app.get(API_PREFIX + "/technologies/{tech_id}")
    def tech_detail(tech_id: str):
        tech = engine.tech(tech_id)
        path = analytics.level_path(engine.transitions_for(tech_id))
        pending = engine.pending_proposal(tech_id)
        return {
            **_tech_summary(engine, tech),
            "path": path.sequence,
            "cycle_count": path.cycle_count,
            "pending_proposal": codec.proposal_to_dict(pending) if pending else None,
            "tasks": [codec.task_to_dict(task) for task in engine.tasks_for(tech_id)],
            "card_versions": len(engine.card(tech_id).versions),
            "transitions": [codec.transition_to_dict(t) for t in engine.transitions_for(tech_id)],
        }

    @app.post(API_PREFIX + "/technologies/{tech_id}/archive")
    def archive(request: Request, tech_id: str):
        authorize(request)
        with write_lock:
            return codec.technology_to_dict(engine.archive_technology(tech_id))

    # -- cards ----------------------------------------------------------

    @app.get(API_PREFIX + "/technologies/{tech_id}/card")
    def card_history(tech_id: str):
        return codec.card_to_dict(engine.card(tech_id))

    @app.post(API_PREFIX + "/technologies/{tech_id}/card")
    def amend_card(request: Request, tech_id: str, body: dict = Body(...)):
        authorize(request)
        with write_lock:
            version = engine.amend_card(
                tech_id,
                section=body.get("section", ""),
                text=body.get("text", ""),
                title=body.get("title", ""),
                level=body.get("level"),
            )
            return codec.card_version_to_dict(version)

    @app.get(API_PREFIX + "/technologies/{tech_id}/gates")
    def gates(tech_id: str):
        report = engine.readiness(tech_id)
        return {
            "tech_id": tech_id,
            "gates": [codec.gate_check_to_dict(check) for check in engine.gate_checks(tech_id)],
            "missing_sections": report.missing,
            "graduation_ready": report.graduation_ready,
        }

    # -- proposals and reviews -------------------------------------------

    @app.post(API_PREFIX + "/technologies/{tech_id}/proposals")
    def propose(request: Request, tech_id: str, body: dict | None = Body(None)):
        authorize(request)
        with write_lock:
            proposal = engine.propose_graduation(tech_id, to_level=(body or {}).get("to_level"))
            return codec.proposal_to_dict(proposal)

    @app.get(API_PREFIX + "/proposals")
    def list_proposals(status: str | None = Query(None)):
        rows = []
        for proposal in engine.state.proposals.values():
            if status is not None and proposal.status.value != status:
                continue
            entry = codec.proposal_to_dict(proposal)
            entry["tech_name"] = engine.tech(proposal.tech_id).name
            rows.append(entry)
        return {"proposals": rows}

    @app.post(API_PREFIX + "/proposals/{proposal_id}/review")
    def review(request: Request, proposal_id: str, body: dict = Body(...)):
        authorize(request)
        with write_lock:
            record = engine.record_review(
                proposal_id,
                panel=[(entry["person"], entry["role"]) for entry in body.get("panel", [])],
                outcome=body.get("outcome", ""),
                tasks=body.get("tasks", []),
                notes=body.get("notes", ""),
            )
            result = codec.review_to_dict(record)
            result["technology"] = codec.technology_to_dict(engine.tech(record.tech_id))
            return result

    @app.post(API_PREFIX + "/reviews/{review_id}/postmortem")
    def postmortem(request: Request, review_id: str, body: dict = Body(...)):
        authorize(request)
        with write_lock:
            return codec.review_to_dict(engine.record_postmortem(review_id, body.get("notes", "")))

    @app.post(API_PREFIX + "/technologies/{tech_id}/regress")
    def regress(request: Request, tech_id: str, body: dict = Body(...)):
        authorize(request)
        with write_lock:
            transition = engine.regress(
                tech_id,
                to_level=body.get("to_level"),
                rationale=body.get("rationale", ""),
                review_ref=body.get("review_ref"),
            )
            return {
                "transition": codec.transition_to_dict(transition),
                "technology": codec.technology_to_dict(engine.tech(tech_id)),
            }

    @app.post(API_PREFIX + "/technologies/{tech_id}/fork")
    def fork(request: Request, tech_id: str, body: dict = Body(...)):
        authorize(request)
        with write_lock:
            child = engine.fork_technology(
                tech_id,
                child_name=body.get("child_name", ""),
                child_initiation_level=body.get("child_initiation_level", body.get("child_level")),
                rationale=body.get("rationale", ""),
                child_id=body.get("child_id"),
            )
            return _tech_summary(engine, child)

    # -- requirements, risks, scorecards ---------------------------------

    @app.post(API_PREFIX + "/technologies/{tech_id}/requirements")
    def add_requirement(request: Request, tech_id: str, body: dict = Body(...)):
        authorize(request)
        with write_lock:
            requirement = engine.add_requirement(
                tech_id,
                description=body.get("description", ""),
                verification=body.get("verification", ""),
                validation=body.get("validation", ""),
            )
            return codec.requirement_to_dict(requirement)

    @app.get(API_PREFIX + "/technologies/{tech_id}/requirements")
    def list_requirements(tech_id: str):
        return {"requirements": [codec.requirement_to_dict(r) for r in engine.requirements_for(tech_id)]}

    @app.post(API_PREFIX + "/technologies/{tech_id}/risks")
    def add_risk(request: Request, tech_id: str, body: dict = Body(...)):
        authorize(request)
        with write_lock:
            engine.tech(tech_id)
            requirement = engine.state.requirements.get(body.get("requirement_id", ""))
            if requirement is not None and requirement.tech_id != tech_id:
                raise errors.RequirementNotFound(
                    f"requirement {requirement.id!r} belongs to {requirement.tech_id!r}, not {tech_id!r}"
                )
            entry = engine.add_risk(
                requirement_id=body.get("requirement_id", ""),
                p_failure=body.get("p_failure"),
                value=body.get("value"),
                sim_to_real=body.get("sim_to_real", False),
                mitigation=body.get("mitigation"),
                test_strategy=body.get("test_strategy"),
            )
            result = codec.risk_to_dict(entry)
            result["flagged"] = entry.risk >= engine.policy.flag_threshold
            return result

    @app.get(API_PREFIX + "/technologies/{tech_id}/risks")
    def list_risks(tech_id: str, flagged: bool = Query(False), threshold: float | None = Query(None)):
        if flagged:
            entries = engine.flagged_risks(tech_id, threshold)
        else:
            entries = engine.risks_for(tech_id)
        cutoff = engine.policy.flag_threshold if threshold is None else threshold
        rows = []
        for entry in entries:
            row = codec.risk_to_dict(entry)
            row["flagged"] = entry.risk >= cutoff
            rows.append(row)
        return {"risks": rows}

    @app.post(API_PREFIX + "/technologies/{tech_id}/scorecard")
    def attach_scorecard(request: Request, tech_id: str, body: dict = Body(...)):
        authorize(request)
        with write_lock:
            return codec.scorecard_to_dict(engine.attach_scorecard(tech_id, body.get("items", [])))

    # -- analytics --------------------------------------------------------

    @app.get(API_PREFIX + "/analytics/time-per-level")
    def time_per_level(now: str | None = Query(None)):
        closing = _parse_now(now, engine)
        rows = []
        for tech_id, events in sorted(engine.events_by_tech().items()):
            report = analytics.time_per_level(events, closing)
            rows.append(
                {
                    "tech_id": tech_id,
                    "per_level": {
                        str(level): {
                            "seconds": dwell.total_seconds,
                            "interval_count": dwell.interval_count,
                        }
                        for level, dwell in sorted(report.per_level.items())
                    },
                    "total_seconds": report.total().total_seconds(),
                }
            )
        return {"now": codec.ts_to_text(closing), "technologies": rows}

    @app.get(API_PREFIX + "/analytics/paths")
    def paths(n: int = Query(2)):
        grams = analytics.frequent_paths(engine.events_by_tech(), n)
        return {
            "n": n,
            "paths": [{"levels": list(gram), "count": count} for gram, count in grams],
        }

    @app.get(API_PREFIX + "/analytics/bottlenecks")
    def bottlenecks(now: str | None = Query(None)):
        closing = _parse_now(now, engine)
        rows = analytics.bottleneck_report(engine.events_by_tech(), closing)
        return {
            "now": codec.ts_to_text(closing),
            "levels": [
                {
                    "level": row.level,
                    "median_seconds": row.median_dwell.total_seconds(),
                    "total_seconds": row.total_dwell.total_seconds(),
                    "tech_count": row.tech_count,
                }
                for row in rows
            ],
        }

    # -- policy ------------------------------------------------------------

    @app.get(API_PREFIX + "/policy")
    def policy():
        return {
            "flag_threshold": engine.policy.flag_threshold,
            "working_group_min_roles": engine.policy.working_group_min_roles,
            "scorecard_item_max": engine.policy.scorecard_item_max,
            "ethics_review_enabled": engine.policy.ethics_review_enabled,
            "levels": {
                str(level): {
                    "name": rule.name,
                    "motto": rule.motto,
                    "required_card_sections": list(rule.required_card_sections),
                    "required_panel_roles": list(rule.required_panel_roles),
                    "gates": list(rule.gates),
                }
                for level, rule in sorted(engine.policy.levels.items())
            },
        }

    # -- dashboard assets ---------------------------------------------------

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="dashboard")
    else:

        @app.get("/")
        def index():
            return {"service": "trlkit", "api": API_PREFIX, "dashboard": "not built"}

    app.state.engine = engine
    app.state.workspace = workspace
    return app
