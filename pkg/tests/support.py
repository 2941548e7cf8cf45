"""Shared helpers for the test suite: deterministic clocks, engine factories,
and drivers that take a technology through its paces."""

from __future__ import annotations

from datetime import datetime, timedelta, timezone

from trlkit.lifecycle import LifecycleEngine
from trlkit.model import ReviewOutcome
from trlkit.policy import default_policy
from trlkit.risks import DEFAULT_SCORECARD_ITEMS

T0 = datetime(2025, 3, 3, 8, 0, 0, tzinfo=timezone.utc)


class TickingClock:
    """Returns T0, T0+step, T0+2*step, ... so event timestamps are exact."""

    def __init__(self, start: datetime = T0, step_seconds: int = 60):
        self.now = start
        self.step = timedelta(seconds=step_seconds)

    def __call__(self) -> datetime:
        current = self.now
        self.now = current + self.step
        return current


def make_engine(policy=None, store=None, step_seconds: int = 60) -> LifecycleEngine:
    return LifecycleEngine(policy=policy or default_policy(), store=store, clock=TickingClock(step_seconds=step_seconds))


def panel_for(engine: LifecycleEngine, level: int) -> list[tuple[str, str]]:
    """A panel that covers every role the policy requires at `level`."""
    return [(f"{role}-person", role) for role in engine.policy.rule(level).required_panel_roles]


def fill_missing_sections(engine: LifecycleEngine, tech_id: str) -> None:
    """Attach a deliverable for every card section the readiness check wants."""
    for section_id in engine.readiness(tech_id).missing:
        if section_id == "working-group":
            engine.amend_card(tech_id, "working-group", "person-a", title="applied-ai-engineer")
            engine.amend_card(tech_id, "working-group", "person-b", title="product-manager")
        else:
            engine.amend_card(tech_id, section_id, f"evidence for {section_id}")


def satisfy_gates(engine: LifecycleEngine, tech_id: str) -> None:
    for check in engine.gate_checks(tech_id):
        if check.satisfied:
            continue
        if check.gate_id == "test-scorecard":
            engine.attach_scorecard(
                tech_id,
                [{"item_id": i, "description": d, "score": 1} for i, d in DEFAULT_SCORECARD_ITEMS],
            )
        elif check.gate_id == "sim-to-real-risk":
            requirement = engine.add_requirement(
                tech_id,
                description="simulation results must transfer to the real setting",
                verification="transfer tests in the harness",
                validation="shadow runs against live data",
            )
            engine.add_risk(
                requirement.id,
                p_failure=0.3,
                value=6,
                sim_to_real=True,
                mitigation="staged rollout behind a shadow deployment",
                test_strategy="replay live traces and compare decisions",
            )
        elif check.gate_id == "working-group":
            engine.amend_card(tech_id, "working-group", "person-a", title="applied-ai-engineer")
            engine.amend_card(tech_id, "working-group", "person-b", title="product-manager")
        else:
            engine.amend_card(tech_id, check.gate_id, f"evidence for {check.gate_id}")


def mitigate_flagged(engine: LifecycleEngine, tech_id: str) -> None:
    # flagged risks block proposals until mitigated; mitigation is immutable
    # on the entry, so tests simply avoid creating unmitigated flagged risks
    # unless they mean to.
    for entry in engine.flagged_risks(tech_id):
        if not entry.mitigation:
            raise AssertionError(f"test driver left an unmitigated flagged risk {entry.id}")


def graduate_once(engine: LifecycleEngine, tech_id: str, notes: str = "ok"):
    """Fill the card, satisfy gates, propose, and graduate one level."""
    fill_missing_sections(engine, tech_id)
    satisfy_gates(engine, tech_id)
    level = engine.tech(tech_id).current_level
    proposal = engine.propose_graduation(tech_id)
    return engine.record_review(
        proposal.id, panel=panel_for(engine, level), outcome=ReviewOutcome.GRADUATE, notes=notes
    )


def graduate_to(engine: LifecycleEngine, tech_id: str, target: int) -> None:
    while engine.tech(tech_id).current_level < target:
        graduate_once(engine, tech_id)
