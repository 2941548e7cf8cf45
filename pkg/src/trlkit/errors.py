"""Domain error hierarchy.

Every error carries a stable machine-readable ``code`` (the class name) that
the CLI prints to stderr and the HTTP service maps to a status code. Most
errors also carry a ``details`` dict with the offending identifiers so
callers can act on them without parsing messages.
"""

from __future__ import annotations

from typing import Any


class TrlError(Exception):
    """Base class for all domain errors."""

    def __init__(self, message: str = "", **details: Any):
        super().__init__(message or self.__class__.__name__)
        self.message = message or self.__class__.__name__
        self.details = details

    @property
    def code(self) -> str:
        return self.__class__.__name__

    def __str__(self) -> str:
        return self.message


# --- core-model ---------------------------------------------------------


class InvalidLevel(TrlError):
    """Readiness level outside the closed 0-9 range."""


class MalformedVersion(TrlError):
    """Text does not parse as a non-negative M.m.p triple."""


class UnresolvedComponent(TrlError):
    """A composition references a technology id missing from the registry."""


class CyclicComposition(TrlError):
    """Component references loop back on themselves."""


# transition verdict reason codes, raised when a command attempts the move

class SkipNotAllowed(TrlError):
    """Graduation would advance more than one level."""


class NotAStep(TrlError):
    """Graduation target is not exactly one level above the source."""


class NotLower(TrlError):
    """Regression target is not strictly below the source."""


class InitiationHasNoSource(TrlError):
    """Initiation supplied a source level."""


# --- lifecycle ----------------------------------------------------------


class TechnologyNotFound(TrlError):
    pass


class DuplicateTechnology(TrlError):
    pass


class AlreadyArchived(TrlError):
    pass


class InvalidArgument(TrlError):
    """Degenerate command input (empty name, blank section text, ...)."""


class MissingJustification(TrlError):
    """Initiation above level 0 must state why earlier levels are pre-satisfied."""


class MissingRationale(TrlError):
    pass


class PendingProposalExists(TrlError):
    pass


class ProposalNotFound(TrlError):
    pass


class ProposalNotPending(TrlError):
    pass


class CardIncomplete(TrlError):
    """Card is missing required sections; details carry the section ids."""


class GateUnsatisfied(TrlError):
    """One or more graduation gates lack satisfying evidence."""


class UnmitigatedFlaggedRisk(TrlError):
    """Flagged risk entries lack mitigations; details carry the risk ids."""


class PanelRolesInsufficient(TrlError):
    """Review panel does not cover the roles the policy requires."""


class EmptyTaskListOnReturn(TrlError):
    pass


class ReviewNotFound(TrlError):
    pass


class PostmortemAlreadyRecorded(TrlError):
    pass


class NotAGraduation(TrlError):
    pass


class ParentNotFound(TrlError):
    pass


class ChildLevelAbovesParent(TrlError):
    """Fork child cannot start above the parent's current level."""


class CompositionLevelDerived(TrlError):
    """Compositions change level only through their components."""


# --- risk register ------------------------------------------------------


class RequirementNotFound(TrlError):
    pass


class RiskNotFound(TrlError):
    pass


class RequirementIncomplete(TrlError):
    """Verification and validation descriptions must both be non-empty."""


class ProbabilityOutOfRange(TrlError):
    pass


class ValueOutOfRange(TrlError):
    pass


class ScoreOutOfBounds(TrlError):
    pass


# --- analytics ----------------------------------------------------------


class UnsortedLog(TrlError):
    pass


class MissingInitiation(TrlError):
    pass


class InvalidNGramLength(TrlError):
    pass


class EmptyPortfolio(TrlError):
    pass


class InvalidNow(TrlError):
    """Analytics `now` precedes the last event of the log."""


# --- api ----------------------------------------------------------------


class Unauthorized(TrlError):
    """Mutating request without the configured bearer token."""


# --- store --------------------------------------------------------------


class StorageFailure(TrlError):
    pass


class SequenceConflict(TrlError):
    """A concurrent writer already appended the sequence number."""


class CorruptLog(TrlError):
    """Replay hit an unparsable or invalid record; details carry the seq."""

    def __init__(self, message: str = "", *, seq: int | None = None, **details: Any):
        super().__init__(message, seq=seq, **details)
        self.seq = seq


class VersionGap(TrlError):
    pass


class CardNotFound(TrlError):
    pass


class MalformedPolicy(TrlError):
    pass


class WorkspaceNotFound(TrlError):
    pass


class WorkspaceExists(TrlError):
    pass
