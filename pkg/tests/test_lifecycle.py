"""Command engine: initiation, proposals, reviews, regressions, forks."""

import pytest

from trlkit.errors import (
    CardIncomplete,
    ChildLevelAbovesParent,
    CompositionLevelDerived,
    EmptyTaskListOnReturn,
    GateUnsatisfied,
    InvalidLevel,
    MissingJustification,
    MissingRationale,
    NotAGraduation,
    NotLower,
    PanelRolesInsufficient,
    ParentNotFound,
    PendingProposalExists,
    PostmortemAlreadyRecorded,
    ProposalNotPending,
    SkipNotAllowed,
    UnmitigatedFlaggedRisk,
)
from trlkit.model import ProposalStatus, ReviewOutcome, TaskItem, TransitionCause

from support import (
    fill_missing_sections,
    graduate_once,
    graduate_to,
    make_engine,
    panel_for,
    satisfy_gates,
)


class TestRegistration:
    def test_off_the_shelf_model_starts_mid_process(self):
        engine = make_engine()
        tech = engine.register_technology(
            "off-the-shelf object recognizer", "model", 4,
            justification="pretrained vendor model, PoC demonstrated",
        )
        assert tech.current_level == 4
        assert engine.transitions_for(tech.id)[0].cause is TransitionCause.INITIATION
        assert len(engine.card(tech.id).versions) == 1

    def test_ground_floor_entry_needs_no_justification(self):
        engine = make_engine()
        tech = engine.register_technology("new kernel idea", "algorithm", 0, justification="")
        assert tech.current_level == 0

    def test_out_of_range_level_rejected(self):
        engine = make_engine()
        with pytest.raises(InvalidLevel):
            engine.register_technology("x", "model", 10, justification="nope")

    def test_mid_process_entry_requires_justification(self):
        engine = make_engine()
        with pytest.raises(MissingJustification):
            engine.register_technology("x", "model", 3, justification="  ")

    def test_initiation_event_carries_justification(self):
        engine = make_engine()
        tech = engine.register_technology("y", "model", 2, justification="bench evidence on file")
        assert engine.transitions_for(tech.id)[0].rationale == "bench evidence on file"


class TestProposals:
    def test_happy_path_snapshot(self):
        engine = make_engine()
        tech = engine.register_technology("widget", "model", 4, justification="vendor PoC")
        fill_missing_sections(engine, tech.id)
        satisfy_gates(engine, tech.id)
        proposal = engine.propose_graduation(tech.id)
        assert proposal.from_level == 4
        assert proposal.status is ProposalStatus.PENDING
        assert proposal.card_version_at_proposal == engine.card(tech.id).latest().version_no

    def test_incomplete_card_blocks(self):
        engine = make_engine()
        tech = engine.register_technology("widget", "model", 2, justification="bench evidence")
        with pytest.raises(CardIncomplete) as excinfo:
            engine.propose_graduation(tech.id)
        assert "requirements-doc" in excinfo.value.details["missing"]

    def test_unsatisfied_gate_blocks(self):
        engine = make_engine()
        tech = engine.register_technology("widget", "model", 4, justification="vendor PoC")
        fill_missing_sections(engine, tech.id)
        # ethics gate left unsatisfied on purpose
        with pytest.raises(GateUnsatisfied) as excinfo:
            engine.propose_graduation(tech.id)
        assert "ethics-review" in excinfo.value.details["gates"]

    def test_flagged_risk_without_mitigation_blocks(self):
        engine = make_engine()
        tech = engine.register_technology("widget", "model", 3, justification="engineering stage entry")
        fill_missing_sections(engine, tech.id)
        satisfy_gates(engine, tech.id)
        requirement = engine.add_requirement(tech.id, "holds under drift", "tests", "field trials")
        risk = engine.add_risk(requirement.id, 0.9, 9)  # 8.1 >= default threshold 5.0
        with pytest.raises(UnmitigatedFlaggedRisk) as excinfo:
            engine.propose_graduation(tech.id)
        assert risk.id in excinfo.value.details["risk_ids"]

    def test_mitigated_flagged_risk_passes(self):
        engine = make_engine()
        tech = engine.register_technology("widget", "model", 3, justification="engineering stage entry")
        fill_missing_sections(engine, tech.id)
        requirement = engine.add_requirement(tech.id, "holds under drift", "tests", "field trials")
        engine.add_risk(requirement.id, 0.9, 9, mitigation="staged rollout with rollback")
        assert engine.propose_graduation(tech.id).status is ProposalStatus.PENDING

    def test_second_pending_proposal_rejected(self):
        engine = make_engine()
        tech = engine.register_technology("widget", "model", 0)
        fill_missing_sections(engine, tech.id)
        engine.propose_graduation(tech.id)
        with pytest.raises(PendingProposalExists):
            engine.propose_graduation(tech.id)

    def test_skip_target_rejected(self):
        engine = make_engine()
        tech = engine.register_technology("widget", "model", 4, justification="vendor PoC")
        with pytest.raises(SkipNotAllowed):
            engine.propose_graduation(tech.id, to_level=6)

    def test_proposal_at_top_level_rejected(self):
        engine = make_engine()
        tech = engine.register_technology("widget", "model", 9, justification="already deployed elsewhere")
        fill_missing_sections(engine, tech.id)
        with pytest.raises(InvalidLevel):
            engine.propose_graduation(tech.id)

    def test_composition_cannot_propose(self):
        engine = make_engine()
        leaf = engine.register_technology("part", "model", 3, justification="engineering stage entry")
        composition = engine.register_technology(
            "system", "composition", 3, justification="matches part", components=[leaf.id]
        )
        with pytest.raises(CompositionLevelDerived):
            engine.propose_graduation(composition.id)


class TestReviews:
    def test_graduation_advances_and_bumps_card(self):
        engine = make_engine()
        tech = engine.register_technology("widget", "model", 2, justification="bench evidence")
        versions_before = len(engine.card(tech.id).versions)
        review = graduate_once(engine, tech.id)
        assert engine.tech(tech.id).current_level == 3
        assert review.outcome is ReviewOutcome.GRADUATE
        latest = engine.card(tech.id).latest()
        assert latest.annotation and review.id in latest.annotation
        assert len(engine.card(tech.id).versions) > versions_before
        last_transition = engine.transitions_for(tech.id)[-1]
        assert (last_transition.from_level, last_transition.to_level) == (2, 3)
        assert last_transition.review_ref == review.id

    def test_return_keeps_level_and_attaches_tasks(self):
        engine = make_engine()
        tech = engine.register_technology("widget", "model", 0)
        fill_missing_sections(engine, tech.id)
        proposal = engine.propose_graduation(tech.id)
        review = engine.record_review(
            proposal.id,
            panel=panel_for(engine, 0),
            outcome=ReviewOutcome.RETURN,
            tasks=[TaskItem("add OOD test"), TaskItem("quantify corner case")],
        )
        assert engine.tech(tech.id).current_level == 0
        assert len(review.tasks) == 2
        assert len(engine.tasks_for(tech.id)) == 2
        assert engine.pending_proposal(tech.id) is None

    def test_insufficient_panel_rejected(self):
        engine = make_engine()
        tech = engine.register_technology("widget", "model", 0)
        fill_missing_sections(engine, tech.id)
        proposal = engine.propose_graduation(tech.id)
        with pytest.raises(PanelRolesInsufficient) as excinfo:
            engine.record_review(proposal.id, panel=[("pat", "pm")], outcome=ReviewOutcome.GRADUATE)
        assert excinfo.value.details["roles"] == ["research-lead"]

    def test_return_demands_tasks(self):
        engine = make_engine()
        tech = engine.register_technology("widget", "model", 0)
        fill_missing_sections(engine, tech.id)
        proposal = engine.propose_graduation(tech.id)
        with pytest.raises(EmptyTaskListOnReturn):
            engine.record_review(proposal.id, panel=[], outcome=ReviewOutcome.RETURN, tasks=[])

    def test_decided_proposal_cannot_be_reviewed_again(self):
        engine = make_engine()
        tech = engine.register_technology("widget", "model", 0)
        graduate_once(engine, tech.id)
        decided = list(engine.state.proposals)[0]
        with pytest.raises(ProposalNotPending):
            engine.record_review(decided, panel=panel_for(engine, 0), outcome=ReviewOutcome.GRADUATE)

    def test_proposal_level_always_matches_current(self):
        engine = make_engine()
        tech = engine.register_technology("widget", "model", 0)
        fill_missing_sections(engine, tech.id)
        proposal = engine.propose_graduation(tech.id)
        assert proposal.from_level == engine.tech(tech.id).current_level


class TestPostmortem:
    def test_stored_once(self):
        engine = make_engine()
        tech = engine.register_technology("widget", "model", 0)
        review = graduate_once(engine, tech.id)
        engine.record_postmortem(review.id, "cut dead experiment code, improved review checklist")
        assert engine.state.reviews[review.id].postmortem.startswith("cut dead")
        with pytest.raises(PostmortemAlreadyRecorded):
            engine.record_postmortem(review.id, "again")

    def test_only_graduations_get_postmortems(self):
        engine = make_engine()
        tech = engine.register_technology("widget", "model", 0)
        fill_missing_sections(engine, tech.id)
        proposal = engine.propose_graduation(tech.id)
        review = engine.record_review(
            proposal.id, panel=[], outcome=ReviewOutcome.RETURN, tasks=[TaskItem("do more")]
        )
        with pytest.raises(NotAGraduation):
            engine.record_postmortem(review.id, "notes")


class TestRegression:
    def test_dial_back(self):
        engine = make_engine()
        tech = engine.register_technology("widget", "model", 5, justification="capability entry")
        transition = engine.regress(tech.id, 2, "PoP assumptions invalidated by real data")
        assert engine.tech(tech.id).current_level == 2
        assert transition.cause is TransitionCause.REGRESSION

    def test_self_transition_rejected(self):
        engine = make_engine()
        tech = engine.register_technology("widget", "model", 5, justification="capability entry")
        with pytest.raises(NotLower):
            engine.regress(tech.id, 5, "no-op")

    def test_rationale_required(self):
        engine = make_engine()
        tech = engine.register_technology("widget", "model", 5, justification="capability entry")
        with pytest.raises(MissingRationale):
            engine.regress(tech.id, 2, "   ")

    def test_pending_proposal_cancelled(self):
        engine = make_engine()
        tech = engine.register_technology("widget", "model", 3, justification="engineering stage entry")
        fill_missing_sections(engine, tech.id)
        satisfy_gates(engine, tech.id)
        proposal = engine.propose_graduation(tech.id)
        engine.regress(tech.id, 1, "field data contradicted the bench results")
        assert engine.state.proposals[proposal.id].status is ProposalStatus.CANCELLED
        assert engine.pending_proposal(tech.id) is None
        assert engine.tech(tech.id).current_level == 1


class TestFork:
    def test_child_copies_implicit_knowledge_not_deliverables(self):
        engine = make_engine()
        parent = engine.register_technology("parent-algo", "algorithm", 2, justification="PoP entry")
        engine.amend_card(parent.id, "modeling-assumptions", "stationary objective")
        engine.amend_card(parent.id, "requirements-doc", "requirements with V&V steps")
        child = engine.fork_technology(parent.id, "applied variant", 2)
        child_card = engine.card(child.id).latest()
        assert child_card.implicit_knowledge.modeling_assumptions == ["stationary objective"]
        assert child_card.deliverables == {}
        assert child.current_level == 2
        assert child.parent_id == parent.id
        assert engine.transitions_for(child.id)[0].cause is TransitionCause.FORK_CHILD_CREATED

    def test_child_cannot_outrank_parent(self):
        engine = make_engine()
        parent = engine.register_technology("parent-algo", "algorithm", 2, justification="PoP entry")
        with pytest.raises(ChildLevelAbovesParent):
            engine.fork_technology(parent.id, "too ambitious", 3)

    def test_fork_back_to_research(self):
        engine = make_engine()
        parent = engine.register_technology("parent-algo", "algorithm", 4, justification="PoC entry")
        child = engine.fork_technology(parent.id, "research track", 1, rationale="circles back for more research")
        assert child.current_level == 1

    def test_unknown_parent(self):
        engine = make_engine()
        with pytest.raises(ParentNotFound):
            engine.fork_technology("ghost", "child", 1)

    def test_child_later_edits_do_not_touch_parent(self):
        engine = make_engine()
        parent = engine.register_technology("parent-algo", "algorithm", 2, justification="PoP entry")
        engine.amend_card(parent.id, "modeling-assumptions", "original view")
        child = engine.fork_technology(parent.id, "spin-off", 1)
        engine.amend_card(child.id, "modeling-assumptions", "child-only refinement")
        assert engine.card(parent.id).latest().implicit_knowledge.modeling_assumptions == ["original view"]


class TestInvariantsOverSessions:
    def test_replaying_transitions_yields_current_level(self):
        engine = make_engine()
        tech = engine.register_technology("widget", "model", 1, justification="research entry")
        graduate_to(engine, tech.id, 3)
        engine.regress(tech.id, 1, "model family dead end")
        graduate_to(engine, tech.id, 2)
        level = None
        for event in engine.transitions_for(tech.id):
            level = event.to_level
        assert level == engine.tech(tech.id).current_level == 2

    def test_log_steps_always_legal(self):
        engine = make_engine()
        tech = engine.register_technology("widget", "model", 0)
        graduate_to(engine, tech.id, 4)
        engine.regress(tech.id, 2, "returning for more principle work")
        graduate_to(engine, tech.id, 5)
        for event in engine.transitions_for(tech.id):
            if event.cause is TransitionCause.GRADUATION:
                assert event.to_level == event.from_level + 1
            elif event.cause is TransitionCause.REGRESSION:
                assert event.to_level < event.from_level

    def test_card_versions_at_least_one_plus_graduations(self):
        engine = make_engine()
        tech = engine.register_technology("widget", "model", 0)
        graduate_to(engine, tech.id, 5)
        graduations = sum(
            1 for e in engine.transitions_for(tech.id) if e.cause is TransitionCause.GRADUATION
        )
        assert len(engine.card(tech.id).versions) >= 1 + graduations

    def test_level_five_exit_needs_interdisciplinary_group(self):
        engine = make_engine()
        tech = engine.register_technology("widget", "model", 5, justification="capability entry")
        # one role only: section present but the gate must hold the line
        engine.amend_card(tech.id, "working-group", "person-a", title="applied-ai-engineer")
        with pytest.raises(GateUnsatisfied) as excinfo:
            engine.propose_graduation(tech.id)
        assert "working-group" in excinfo.value.details["gates"]
        engine.amend_card(tech.id, "working-group", "person-b", title="product-manager")
        assert engine.propose_graduation(tech.id).status is ProposalStatus.PENDING

    def test_sim_to_real_gate_triggers_on_declared_testbed(self):
        engine = make_engine()
        tech = engine.register_technology("sim-first", "model", 2, justification="PoP entry")
        engine.amend_card(tech.id, "requirements-doc", "requirements with V&V steps")
        engine.amend_card(tech.id, "testbed-results", "ran in a simulated warehouse", level=2)
        graduate_once(engine, tech.id)  # 2 -> 3
        graduate_once(engine, tech.id)  # 3 -> 4
        fill_missing_sections(engine, tech.id)
        engine.amend_card(tech.id, "ethics-review", "review board sign-off")
        with pytest.raises(GateUnsatisfied) as excinfo:
            engine.propose_graduation(tech.id)
        assert "sim-to-real-risk" in excinfo.value.details["gates"]
        requirement = engine.add_requirement(tech.id, "transfers to the real site", "harness", "shadow runs")
        engine.add_risk(
            requirement.id, 0.4, 7, sim_to_real=True,
            mitigation="shadow deployment first", test_strategy="replay real traces",
        )
        assert engine.propose_graduation(tech.id).status is ProposalStatus.PENDING
