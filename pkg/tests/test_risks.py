"""Risk formula, flagging partition, scorecard arithmetic."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from trlkit.errors import (
    ProbabilityOutOfRange,
    RequirementIncomplete,
    RequirementNotFound,
    ScoreOutOfBounds,
    ValueOutOfRange,
)
from trlkit.model import RiskEntry
from trlkit.risks import DEFAULT_SCORECARD_ITEMS, flagged_risks, risk_score

from support import make_engine


def entry(entry_id, risk):
    return RiskEntry(
        id=entry_id, requirement_id="req-1", tech_id="t", p_failure=risk / 10, value=10, risk=risk
    )


class TestRiskScore:
    def test_direct_product(self):
        assert risk_score(0.5, 10) == 5.0

    def test_zero_probability(self):
        assert risk_score(0.0, 7) == 0.0

    def test_maximum(self):
        assert risk_score(1.0, 10) == 10.0

    def test_value_zero_rejected(self):
        with pytest.raises(ValueOutOfRange):
            risk_score(0.5, 0)

    def test_value_eleven_rejected(self):
        with pytest.raises(ValueOutOfRange):
            risk_score(0.5, 11)

    @pytest.mark.parametrize("p", [-0.01, 1.5, float("nan")])
    def test_probability_out_of_range(self, p):
        with pytest.raises(ProbabilityOutOfRange):
            risk_score(p, 5)

    @given(
        p=st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
        v=st.integers(min_value=1, max_value=10),
    )
    def test_range_and_exactness(self, p, v):
        score = risk_score(p, v)
        assert score == p * v
        assert 0.0 <= score <= 10.0

    @given(
        p_low=st.floats(min_value=0.0, max_value=1.0),
        p_high=st.floats(min_value=0.0, max_value=1.0),
        v=st.integers(min_value=1, max_value=10),
    )
    def test_monotone_in_probability(self, p_low, p_high, v):
        low, high = sorted([p_low, p_high])
        assert risk_score(low, v) <= risk_score(high, v)


class TestFlagging:
    def test_filter_and_sort(self):
        entries = [entry("r1", 8.1), entry("r2", 0.3), entry("r3", 5.0)]
        result = flagged_risks(entries, 5.0)
        assert [e.risk for e in result] == [8.1, 5.0]

    def test_empty_register(self):
        assert flagged_risks([], 5.0) == []

    def test_zero_threshold_includes_all_descending(self):
        entries = [entry("r1", 1.0), entry("r2", 9.0), entry("r3", 4.0)]
        assert [e.risk for e in flagged_risks(entries, 0.0)] == [9.0, 4.0, 1.0]

    def test_ties_break_by_id(self):
        entries = [entry("r2", 5.0), entry("r1", 5.0)]
        assert [e.id for e in flagged_risks(entries, 0.0)] == ["r1", "r2"]

    def test_partition_property(self):
        entries = [entry(f"r{i}", i * 0.7) for i in range(15)]
        threshold = 4.2
        kept = {e.id for e in flagged_risks(entries, threshold)}
        for e in entries:
            assert (e.id in kept) == (e.risk >= threshold)


class TestRegisterOperations:
    def test_add_risk_computes_and_flags(self):
        engine = make_engine()
        tech = engine.register_technology("widget", "model", 0)
        requirement = engine.add_requirement(tech.id, "must be safe", "unit tests", "field trials")
        risk = engine.add_risk(requirement.id, 0.9, 9)
        assert risk.risk == pytest.approx(8.1)
        assert risk.risk >= engine.policy.flag_threshold
        assert engine.flagged_risks(tech.id) == [risk]

    def test_low_risk_not_flagged_and_marked_sim_to_real(self):
        engine = make_engine()
        tech = engine.register_technology("widget", "model", 0)
        requirement = engine.add_requirement(tech.id, "transfers to the real line", "harness", "shadow runs")
        risk = engine.add_risk(
            requirement.id, 0.1, 3, sim_to_real=True,
            mitigation="fallback heuristic", test_strategy="shadow test on real data",
        )
        assert risk.risk == pytest.approx(0.3)
        assert risk.sim_to_real
        assert engine.flagged_risks(tech.id) == []

    def test_probability_out_of_range_via_engine(self):
        engine = make_engine()
        tech = engine.register_technology("widget", "model", 0)
        requirement = engine.add_requirement(tech.id, "d", "v", "w")
        with pytest.raises(ProbabilityOutOfRange):
            engine.add_risk(requirement.id, 1.5, 5)

    def test_unknown_requirement(self):
        engine = make_engine()
        engine.register_technology("widget", "model", 0)
        with pytest.raises(RequirementNotFound):
            engine.add_risk("req-404", 0.5, 5)

    def test_requirement_needs_verification_and_validation(self):
        engine = make_engine()
        tech = engine.register_technology("widget", "model", 0)
        with pytest.raises(RequirementIncomplete):
            engine.add_requirement(tech.id, "described", "", "validated")

    def test_risk_rederivable_from_stored_fields(self):
        engine = make_engine()
        tech = engine.register_technology("widget", "model", 0)
        requirement = engine.add_requirement(tech.id, "d", "v", "w")
        for p, v in [(0.25, 4), (0.33, 9), (1.0, 1)]:
            stored = engine.add_risk(requirement.id, p, v)
            assert stored.risk == stored.p_failure * stored.value


class TestScorecard:
    def test_total_is_sum(self):
        engine = make_engine()
        tech = engine.register_technology("widget", "model", 0)
        card = engine.attach_scorecard(
            tech.id,
            [{"item_id": f"i{n}", "score": s} for n, s in enumerate([1, 0, 1, 1])],
        )
        assert card.total == 3

    def test_empty_items_leave_gate_unsatisfied(self):
        engine = make_engine()
        tech = engine.register_technology("widget", "model", 7, justification="integration stage entry")
        card = engine.attach_scorecard(tech.id, [])
        assert card.total == 0
        gate = {c.gate_id: c for c in engine.gate_checks(tech.id)}["test-scorecard"]
        assert not gate.satisfied

    def test_negative_score_rejected(self):
        engine = make_engine()
        tech = engine.register_technology("widget", "model", 0)
        with pytest.raises(ScoreOutOfBounds):
            engine.attach_scorecard(tech.id, [{"item_id": "i0", "score": -1}])

    def test_score_above_policy_max_rejected(self):
        engine = make_engine()
        tech = engine.register_technology("widget", "model", 0)
        with pytest.raises(ScoreOutOfBounds):
            engine.attach_scorecard(tech.id, [{"item_id": "i0", "score": 2}])

    def test_default_checklist_has_seven_items(self):
        assert len(DEFAULT_SCORECARD_ITEMS) == 7
