"""Level policy: per-level names, required card sections, panels and gates.

The built-in default encodes the ten readiness levels. Organizations tune it
through a JSON overlay (`trl-policy.json` in the workspace); the overlay may
amend existing levels and global knobs but may not add or remove levels, and
unknown fields are rejected outright.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Mapping

from .errors import MalformedPolicy
from .model import (
    ALL_LEVELS,
    GATE_ASSUMPTIONS_AND_LIMITATIONS,
    GATE_ETHICS_REVIEW,
    GATE_REQUIREMENTS_DOC,
    GATE_SIM_TO_REAL_RISK,
    GATE_TEST_SCORECARD,
    GATE_WORKING_GROUP,
)

# Deliverable section identifiers used by the default policy.
SECTION_RESEARCH_PLAN = "research-plan"
SECTION_EXPERIMENT_RESULTS = "experiment-results"
SECTION_REQUIREMENTS_DOC = "requirements-doc"
SECTION_TESTBED_RESULTS = "testbed-results"
SECTION_SIMULATION_TESTBED = "simulation-testbed"
SECTION_CODE_QUALITY_REPORT = "code-quality-report"
SECTION_POC_DEMO = "poc-demo"
SECTION_ASSUMPTIONS_AND_LIMITATIONS = "assumptions-and-limitations"
SECTION_ETHICS_REVIEW = "ethics-review"
SECTION_WORKING_GROUP = "working-group"
SECTION_PRODUCT_REQUIREMENTS = "product-requirements"
SECTION_DATA_PIPELINE_SPEC = "data-pipeline-spec"
SECTION_INTEGRATION_TEST_REPORT = "integration-test-report"
SECTION_DEPLOYMENT_TEST_PLAN = "deployment-test-plan"
SECTION_MONITORING_PLAN = "monitoring-plan"
SECTION_FEEDBACK_PATH = "feedback-path"


@dataclass(frozen=True)
class LevelRule:
    level: int
    name: str
    motto: str
    required_card_sections: tuple[str, ...] = ()
    required_panel_roles: tuple[str, ...] = ()
    gates: tuple[str, ...] = ()


@dataclass(frozen=True)
class LevelPolicy:
    levels: dict[int, LevelRule]
    flag_threshold: float = 5.0
    working_group_min_roles: int = 2
    scorecard_item_max: int = 1
    ethics_review_enabled: bool = True

    def rule(self, level: int) -> LevelRule:
        return self.levels[level]

    def gates_for_exit(self, level: int) -> tuple[str, ...]:
        """Gates that must be satisfied to graduate out of `level`."""
        gates = self.levels[level].gates
        if not self.ethics_review_enabled:
            gates = tuple(g for g in gates if g != GATE_ETHICS_REVIEW)
        return gates

    def sections_through(self, level: int, floor: int = 0) -> list[tuple[int, str]]:
        """(level, section) pairs required at every level in [floor, level]."""
        pairs: list[tuple[int, str]] = []
        for lv in range(floor, level + 1):
            for section in self.levels[lv].required_card_sections:
                pairs.append((lv, section))
        return pairs


def default_policy() -> LevelPolicy:
    rules = [
        LevelRule(
            level=0,
            name="Brainstorming",
            motto="Greenfield exploration of sound ideas",
            required_card_sections=(SECTION_RESEARCH_PLAN,),
            required_panel_roles=("research-lead",),
        ),
        LevelRule(
            level=1,
            name="Goal-Oriented Research",
            motto="Principles probed through targeted experiments",
            required_card_sections=(SECTION_EXPERIMENT_RESULTS,),
            required_panel_roles=("research-lead", "researcher"),
        ),
        LevelRule(
            level=2,
            name="Proof of Principle",
            motto="Testbed trials against surrogate conditions",
            required_card_sections=(SECTION_REQUIREMENTS_DOC, SECTION_TESTBED_RESULTS),
            required_panel_roles=("research-lead", "researcher"),
            gates=(GATE_REQUIREMENTS_DOC,),
        ),
        LevelRule(
            level=3,
            name="System Development",
            motto="Research code rebuilt to engineering standards",
            required_card_sections=(SECTION_CODE_QUALITY_REPORT,),
            required_panel_roles=("research-lead", "applied-ai-engineer"),
        ),
        LevelRule(
            level=4,
            name="Proof of Concept",
            motto="Demonstrated against a real scenario",
            required_card_sections=(SECTION_POC_DEMO, SECTION_ASSUMPTIONS_AND_LIMITATIONS),
            required_panel_roles=("research-lead", "applied-ai-engineer", "product-manager"),
            gates=(GATE_ASSUMPTIONS_AND_LIMITATIONS, GATE_ETHICS_REVIEW, GATE_SIM_TO_REAL_RISK),
        ),
        LevelRule(
            level=5,
            name="Capability Handoff",
            motto="From isolated solution to module of a larger process",
            required_card_sections=(SECTION_WORKING_GROUP,),
            required_panel_roles=("research-lead", "applied-ai-engineer", "product-manager"),
            gates=(GATE_WORKING_GROUP,),
        ),
        LevelRule(
            level=6,
            name="Application Development",
            motto="Hardened modules aimed at named use-cases",
            required_card_sections=(SECTION_PRODUCT_REQUIREMENTS, SECTION_DATA_PIPELINE_SPEC),
            required_panel_roles=("applied-ai-engineer", "product-manager", "software-engineer"),
        ),
        LevelRule(
            level=7,
            name="Integrations",
            motto="Wired into platform, pipelines and security",
            required_card_sections=(SECTION_INTEGRATION_TEST_REPORT,),
            required_panel_roles=("applied-ai-engineer", "infrastructure-engineer"),
            gates=(GATE_TEST_SCORECARD,),
        ),
        LevelRule(
            level=8,
            name="Flight-Ready",
            motto="Final form exercised under expected conditions",
            required_card_sections=(SECTION_DEPLOYMENT_TEST_PLAN,),
            required_panel_roles=(
                "research-lead",
                "applied-ai-engineer",
                "product-manager",
                "infrastructure-engineer",
                "software-engineer",
            ),
        ),
        LevelRule(
            level=9,
            name="Deployment",
            motto="Current version monitored, next version improving",
            required_card_sections=(SECTION_MONITORING_PLAN, SECTION_FEEDBACK_PATH),
            required_panel_roles=("maintenance-engineer", "applied-ai-engineer"),
        ),
    ]
    return LevelPolicy(levels={rule.level: rule for rule in rules})


_GLOBAL_FIELDS = {
    "flag_threshold": (int, float),
    "working_group_min_roles": int,
    "scorecard_item_max": int,
    "ethics_review_enabled": bool,
}
_LEVEL_FIELDS = {
    "name": str,
    "motto": str,
    "required_card_sections": list,
    "required_panel_roles": list,
    "gates": list,
}


def _expect(condition: bool, detail: str) -> None:
    if not condition:
        raise MalformedPolicy(detail)


def policy_from_overlay(overlay: Mapping[str, Any], base: LevelPolicy | None = None) -> LevelPolicy:
    """Apply a JSON overlay to the default policy, rejecting unknown fields."""
    policy = base or default_policy()
    _expect(isinstance(overlay, Mapping), "policy overlay must be a JSON object")
    updates: dict[str, Any] = {}
    levels = dict(policy.levels)
    for key, value in overlay.items():
        if key == "levels":
            _expect(isinstance(value, Mapping), "levels must be an object keyed by level")
            for raw_level, patch in value.items():
                try:
                    level = int(raw_level)
                except (TypeError, ValueError):
                    raise MalformedPolicy(f"level key {raw_level!r} is not an integer") from None
                _expect(level in ALL_LEVELS, f"level {level} outside the 0-9 range")
                _expect(isinstance(patch, Mapping), f"level {level} patch must be an object")
                rule_updates: dict[str, Any] = {}
                for field_name, field_value in patch.items():
                    _expect(field_name in _LEVEL_FIELDS, f"unknown level field {field_name!r}")
                    expected = _LEVEL_FIELDS[field_name]
                    _expect(isinstance(field_value, expected), f"level field {field_name!r} has wrong type")
                    if expected is list:
                        _expect(
                            all(isinstance(item, str) for item in field_value),
                            f"level field {field_name!r} must list strings",
                        )
                        field_value = tuple(field_value)
                    rule_updates[field_name] = field_value
                levels[level] = replace(levels[level], **rule_updates)
        elif key in _GLOBAL_FIELDS:
            expected = _GLOBAL_FIELDS[key]
            if expected is bool:
                ok = isinstance(value, bool)
            else:
                ok = isinstance(value, expected) and not isinstance(value, bool)
            _expect(ok, f"field {key!r} has wrong type")
            updates[key] = float(value) if key == "flag_threshold" else value
        else:
            raise MalformedPolicy(f"unknown policy field {key!r}")
    _expect(set(levels) == set(ALL_LEVELS), "policy must define exactly the levels 0-9")
    return replace(policy, levels=levels, **updates)
