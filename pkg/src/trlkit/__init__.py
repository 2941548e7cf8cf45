"""Readiness-level lifecycle governance for ML technologies.

Library surface: domain types (`model`), rule evaluation (`rules`), the
command engine (`lifecycle`), quantified risks (`risks`), portfolio
analytics (`analytics`), workspace persistence (`store`), the HTTP adapter
(`service`), and the `trl` CLI (`cli`).
"""

from .analytics import bottleneck_report, frequent_paths, level_path, okr_check, time_per_level
from .lifecycle import LifecycleEngine, PortfolioState, open_engine
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
    validate_level,
)
from .policy import LevelPolicy, LevelRule, default_policy, policy_from_overlay
from .risks import DEFAULT_SCORECARD_ITEMS, flagged_risks, risk_score
from .rules import Verdict, system_trl, validate_card, validate_transition
from .store import EventRecord, Workspace, replay

__version__ = "0.1.0"

__all__ = [
    "CardVersion",
    "DEFAULT_SCORECARD_ITEMS",
    "DeliverableRecord",
    "EventRecord",
    "GateCheck",
    "GraduationProposal",
    "ImplicitKnowledge",
    "LevelPolicy",
    "LevelRule",
    "LifecycleEngine",
    "PortfolioState",
    "ProjectInfo",
    "ProposalStatus",
    "Requirement",
    "ReviewOutcome",
    "ReviewRecord",
    "RiskEntry",
    "Scorecard",
    "ScorecardItem",
    "SemVerTriple",
    "TaskItem",
    "TechKind",
    "TechStatus",
    "Technology",
    "TransitionCause",
    "TransitionEvent",
    "TrlCard",
    "Verdict",
    "Workspace",
    "bottleneck_report",
    "default_policy",
    "flagged_risks",
    "format_semver",
    "frequent_paths",
    "level_path",
    "okr_check",
    "open_engine",
    "parse_semver",
    "policy_from_overlay",
    "replay",
    "risk_score",
    "system_trl",
    "time_per_level",
    "validate_card",
    "validate_level",
    "validate_transition",
]
