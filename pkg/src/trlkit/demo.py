"""Demo workspace: a Bayesian optimization algorithm for industrial process
optimization, taken from early research through deployment.

Scripted with fixed timestamps so every report over the demo is
deterministic. The lifecycle includes one research dial-back at the proof-
of-principle stage and a level-2 fork, plus a data pipeline and a composition
so the portfolio views have something to aggregate.
"""

from __future__ import annotations

from datetime import datetime, timedelta, timezone

from .lifecycle import LifecycleEngine
from .model import ReviewOutcome, TaskItem
from .risks import DEFAULT_SCORECARD_ITEMS
from .store import Workspace

DEMO_TECH_ID = "bo-algorithm"
_START = datetime(2025, 1, 6, 9, 0, 0, tzinfo=timezone.utc)
_STEP = timedelta(days=3)


class _ScriptedClock:
    """Advances a fixed step per call; keeps the demo log reproducible."""

    def __init__(self, start: datetime, step: timedelta):
        self._next = start
        self._step = step

    def __call__(self) -> datetime:
        current = self._next
        self._next = current + self._step
        return current


def seed_demo(workspace: Workspace) -> LifecycleEngine:
    """Populate `workspace` with the demo portfolio; returns the live engine."""
    engine = LifecycleEngine(
        policy=workspace.load_policy(),
        store=workspace,
        clock=_ScriptedClock(_START, _STEP),
    )

    bo = engine.register_technology(
        name="BO Algorithm",
        kind="algorithm",
        initiation_level=0,
        tech_id=DEMO_TECH_ID,
    ).id
    def card(section: str, text: str, title: str = "", level: int | None = None) -> None:
        engine.amend_card(bo, section, text, title=title, level=level)

    card("owners", "ava-lindqvist, rohan-mehta")
    card("reviewers", "priya-shah")
    card("status", "in-development")
    card("code-version", "0.1.0")
    card("model-version", "0.1.0")
    card("data-version", "0.1.0")
    card("modeling-assumptions", "objective responds smoothly to set-point changes within one production batch")
    card("dataset-biases", "plant historian over-represents steady-state operation; transients are rare")
    card("corner-cases", "cold start with an empty observation history")
    card(
        "research-plan",
        "survey surrogate-model families and acquisition strategies; pick two candidates for bench trials",
        title="research plan",
    )

    def graduate(tech_id: str, panel: list[tuple[str, str]], notes: str, postmortem: str | None = None) -> None:
        proposal = engine.propose_graduation(tech_id)
        review = engine.record_review(proposal.id, panel=panel, outcome=ReviewOutcome.GRADUATE, notes=notes)
        if postmortem:
            engine.record_postmortem(review.id, postmortem)

    research_panel = [("priya-shah", "research-lead"), ("tomas-ferreira", "researcher")]
    graduate(bo, [("priya-shah", "research-lead")], "hypotheses and reading list are sound")

    # level 1: goal-oriented experiments
    card(
        "experiment-results",
        "bench runs on synthetic objectives; candidate acquisition beats random search on 7 of 8 cases",
        title="bench experiments",
    )
    graduate(
        bo,
        research_panel,
        "experiment design and effect sizes hold up",
        postmortem="dropped the second surrogate family early; notebooks archived into the shared index",
    )

    # level 2: proof of principle against a simulated plant
    card(
        "requirements-doc",
        "formal requirements with verification and validation steps for the optimizer loop",
        title="requirements v1",
    )
    card(
        "simulation-testbed",
        "plant simulator with surrogate reactor kinetics standing in for live telemetry",
        title="surrogate testbed",
    )
    card(
        "testbed-results",
        "optimizer converges within 40 iterations on the simulated line at three operating points",
        title="testbed report",
    )
    requirement = engine.add_requirement(
        bo,
        description="recommended set-points must respect hard safety envelopes",
        verification="unit tests assert clamping against the published envelope table",
        validation="process engineers replay recommendations against historical incidents",
    )
    engine.add_risk(
        requirement.id,
        p_failure=0.65,
        value=8,
        sim_to_real=True,
        mitigation="shadow-mode trial against live plant data before any set-point is written",
        test_strategy="replay recorded transients through the simulator and diff recommended set-points",
    )
    engine.add_risk(requirement.id, p_failure=0.2, value=4)

    # first review at level 2 returns with tasks, and the team dials back
    proposal = engine.propose_graduation(bo)
    engine.record_review(
        proposal.id,
        panel=research_panel,
        outcome=ReviewOutcome.RETURN,
        tasks=[
            TaskItem("quantify acquisition behavior under heavy observation noise", "target: regret within 2x of clean runs"),
            TaskItem("measure sensitivity to surrogate-model mismatch"),
        ],
        notes="surrogate mismatch unquantified; not ready to split off applied work",
    )
    engine.regress(bo, 1, "surrogate mismatch invalidated the principle experiments; back to research")
    card(
        "experiment-results",
        "noise-injection study: acquisition stays within 1.6x regret of clean runs up to 12% sensor noise",
        title="noise robustness study",
    )
    graduate(bo, research_panel, "mismatch quantified; principle holds under realistic noise")

    # the level-2 bifurcation: a research question splits off while the
    # main track heads toward applied work
    engine.fork_technology(
        bo,
        child_name="BO Multi-Objective Study",
        child_initiation_level=1,
        rationale="multi-objective acquisition circles back for more research",
    )
    graduate(
        bo,
        research_panel,
        "requirements, testbed evidence and risk entries are in place",
        postmortem="testbed scripts promoted into the shared harness; two dead branches deleted",
    )

    # level 3: engineering hardening
    card(
        "code-quality-report",
        "library extracted from notebooks; typed public surface, CI with lint and coverage at 87%",
        title="engineering review",
    )
    graduate(bo, [("priya-shah", "research-lead"), ("marco-abate", "applied-ai-engineer")], "codebase is maintainable and extensible")

    # level 4: proof of concept on the real line
    card(
        "poc-demo",
        "two-week pilot on line 3: recommended set-points accepted by operators in 78% of shifts",
        title="pilot summary",
    )
    card(
        "assumptions-and-limitations",
        "assumes batch-stationary objective; degrades when feedstock changes mid-batch; no cold-start policy yet",
        title="assumptions and limitations",
    )
    card("ethics-review", "internal review board sign-off: no personal data, operator remains in the loop", title="ethics sign-off")
    graduate(
        bo,
        [("priya-shah", "research-lead"), ("marco-abate", "applied-ai-engineer"), ("lena-ortiz", "product-manager")],
        "pilot demonstrates utility; assumptions communicated; ethics and sim-to-real gates satisfied",
        postmortem="pilot playbook captured; sim-to-real checklist reused from the risk register",
    )

    # level 5: capability handoff to an interdisciplinary group
    for role, person in [
        ("product-manager", "lena-ortiz"),
        ("applied-ai-engineer", "marco-abate"),
        ("infrastructure-engineer", "sofia-nkemelu"),
    ]:
        card("working-group", person, title=role)
    engine.amend_card(bo, "status", "handoff to product")
    graduate(
        bo,
        [("priya-shah", "research-lead"), ("marco-abate", "applied-ai-engineer"), ("lena-ortiz", "product-manager")],
        "working group staffed; resourcing approved for productization",
    )

    # level 6: application development
    card("product-requirements", "product requirement set for the process-optimization app, signed by plant ops", title="PRD")
    card("data-pipeline-spec", "historian ingestion spec: 1-minute aggregates, late-data policy, schema contract", title="pipeline spec")
    card("code-version", "0.9.0")
    graduate(
        bo,
        [("marco-abate", "applied-ai-engineer"), ("lena-ortiz", "product-manager"), ("devon-black", "software-engineer")],
        "module meets product caliber; pipelines specified",
    )

    # level 7: integrations, scorecard gate
    card(
        "integration-test-report",
        "end-to-end runs against staging plant data; critical scenario and data-slice suites green",
        title="integration tests",
    )
    engine.attach_scorecard(
        bo,
        [
            {"item_id": item_id, "description": description, "score": 1 if item_id != "monitoring" else 0}
            for item_id, description in DEFAULT_SCORECARD_ITEMS
        ],
    )
    graduate(
        bo,
        [("marco-abate", "applied-ai-engineer"), ("sofia-nkemelu", "infrastructure-engineer")],
        "pipelines and test suites reviewed against the scorecard",
    )

    # level 8: flight readiness
    card(
        "deployment-test-plan",
        "shadow deployment for two weeks, then canary on one production line with automated rollback",
        title="deployment tests",
    )
    card("model-version", "1.0.0")
    card("code-version", "1.0.0")
    graduate(
        bo,
        [
            ("priya-shah", "research-lead"),
            ("marco-abate", "applied-ai-engineer"),
            ("lena-ortiz", "product-manager"),
            ("sofia-nkemelu", "infrastructure-engineer"),
            ("devon-black", "software-engineer"),
        ],
        "full stakeholder walkthrough of requirements and validations",
        postmortem="requirements walkthrough template adopted for the next capability",
    )

    # level 9: deployed and monitored
    card("monitoring-plan", "drift monitors on objective residuals; weekly regression suite mails applied and research owners", title="monitoring")
    card("feedback-path", "operator feedback channel triaged weekly; research sees raw notes without filtering", title="feedback loop")
    card("status", "deployed-and-monitored")
    card("data-version", "1.2.0")

    # supporting portfolio members
    pipeline = engine.register_technology(
        name="Plant Historian Pipeline",
        kind="data-pipeline",
        initiation_level=6,
        justification="vendor-managed ingestion, validated in production for two quarters",
        tech_id="plant-historian-pipeline",
    ).id
    engine.amend_card(pipeline, "owners", "sofia-nkemelu")
    engine.register_technology(
        name="Process Optimizer",
        kind="composition",
        initiation_level=6,
        justification="constituents individually demonstrated at level 6 or above",
        components=[bo, pipeline],
        tech_id="process-optimizer",
    )
    return engine


def init_demo(root) -> Workspace:
    """Create a workspace at `root` and seed it with the demo portfolio."""
    workspace = Workspace.create(root)
    seed_demo(workspace)
    return workspace
