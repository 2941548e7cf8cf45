"""Event-sourced persistence for a workspace directory.

Layout:
    <root>/events.log          newline-delimited JSON event records
    <root>/cards/<tech>/card-v<N>.json   immutable card version documents
    <root>/trl-policy.json     optional policy overlay

The log is the single source of truth; card documents are a materialized
view written alongside the records that create them. Appends verify the
next sequence number under an advisory lock so exactly one of two racing
writers wins.
"""

from __future__ import annotations

import fcntl
import json
import os
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import TYPE_CHECKING, Any, Iterator

from . import codec
from .errors import (
    CardNotFound,
    CorruptLog,
    MalformedPolicy,
    SequenceConflict,
    StorageFailure,
    VersionGap,
    WorkspaceExists,
    WorkspaceNotFound,
)
from .model import CardVersion, TrlCard
from .policy import LevelPolicy, default_policy, policy_from_overlay

if TYPE_CHECKING:
    from .lifecycle import PortfolioState

EVENTS_FILE = "events.log"
POLICY_FILE = "trl-policy.json"
CARDS_DIR = "cards"

_TAIL_CHUNK = 64 * 1024


@dataclass(frozen=True)
class EventRecord:
    """One immutable line of the log."""

    seq: int
    ts: datetime
    kind: str
    payload: dict[str, Any]

    def to_line(self) -> str:
        body = {"seq": self.seq, "ts": codec.ts_to_text(self.ts), "kind": self.kind, "payload": self.payload}
        return json.dumps(body, ensure_ascii=False, separators=(",", ":"))


def _record_from_dict(data: dict[str, Any]) -> EventRecord:
    return EventRecord(
        seq=data["seq"],
        ts=codec.ts_from_text(data["ts"]),
        kind=data["kind"],
        payload=data["payload"],
    )


class Workspace:
    """Filesystem handle for one portfolio."""

    def __init__(self, root: str | Path, fsync: bool = True):
        self.root = Path(root)
        self.fsync = fsync
        if not self.events_path.is_file():
            raise WorkspaceNotFound(f"no workspace at {self.root} (missing {EVENTS_FILE})")

    @property
    def events_path(self) -> Path:
        return self.root / EVENTS_FILE

    @property
    def policy_path(self) -> Path:
        return self.root / POLICY_FILE

    @classmethod
    def create(cls, root: str | Path, fsync: bool = True) -> "Workspace":
        root = Path(root)
        events = root / EVENTS_FILE
        if events.exists():
            raise WorkspaceExists(f"workspace already initialized at {root}")
        try:
            root.mkdir(parents=True, exist_ok=True)
            events.touch()
            (root / CARDS_DIR).mkdir(exist_ok=True)
        except OSError as exc:
            raise StorageFailure(f"cannot initialize workspace at {root}: {exc}") from exc
        return cls(root, fsync=fsync)

    # --- event log ------------------------------------------------------

    def append_event(self, record: EventRecord) -> EventRecord:
        """Durably append `record`; its seq must be exactly last + 1."""
        line = record.to_line() + "\n"
        try:
            with open(self.events_path, "a+b") as handle:
                fcntl.flock(handle.fileno(), fcntl.LOCK_EX)
                last = self._last_seq(handle)
                if record.seq != last + 1:
                    raise SequenceConflict(
                        f"log is at seq {last}, cannot append seq {record.seq}", expected=last + 1
                    )
                handle.write(line.encode("utf-8"))
                handle.flush()
                if self.fsync:
                    os.fsync(handle.fileno())
        except OSError as exc:
            raise StorageFailure(f"append failed: {exc}") from exc
        return record

    @staticmethod
    def _last_seq(handle) -> int:
        handle.seek(0, os.SEEK_END)
        size = handle.tell()
        if size == 0:
            return 0
        handle.seek(max(0, size - _TAIL_CHUNK))
        tail = handle.read()
        if not tail.endswith(b"\n"):
            raise StorageFailure("log tail is not newline-terminated; refusing to append")
        lines = tail.splitlines()
        last_line = lines[-1]
        if size > _TAIL_CHUNK and len(lines) == 1:
            raise StorageFailure("log line longer than tail window")
        try:
            return int(json.loads(last_line.decode("utf-8"))["seq"])
        except (ValueError, KeyError, UnicodeDecodeError) as exc:
            raise StorageFailure(f"unreadable log tail: {exc}") from exc

    def read_events(self) -> list[EventRecord]:
        """Parse the full log, verifying sequence continuity from 1."""
        try:
            raw = self.events_path.read_bytes()
        except OSError as exc:
            raise StorageFailure(f"cannot read log: {exc}") from exc
        records: list[EventRecord] = []
        expected = 1
        if raw and not raw.endswith(b"\n"):
            torn_at = raw.count(b"\n") + 1
            raise CorruptLog(f"torn record at seq {torn_at} (no trailing newline)", seq=torn_at)
        for line in raw.splitlines():
            if not line.strip():
                raise CorruptLog(f"blank line where record {expected} expected", seq=expected)
            try:
                data = json.loads(line.decode("utf-8"))
                record = _record_from_dict(data)
            except (ValueError, KeyError, TypeError) as exc:
                raise CorruptLog(f"unparsable record at seq {expected}: {exc}", seq=expected) from exc
            if record.seq != expected:
                raise CorruptLog(f"sequence break: expected {expected}, found {record.seq}", seq=expected)
            records.append(record)
            expected += 1
        return records

    def iter_events(self) -> Iterator[EventRecord]:
        yield from self.read_events()

    # --- card documents -------------------------------------------------

    def _card_dir(self, tech_id: str) -> Path:
        return self.root / CARDS_DIR / tech_id

    def save_card_version(self, tech_id: str, version: CardVersion) -> Path:
        """Persist one immutable card version document (no gaps, no rewrites)."""
        directory = self._card_dir(tech_id)
        existing = self._version_numbers(directory)
        latest = existing[-1] if existing else 0
        if version.version_no != latest + 1:
            raise VersionGap(
                f"card {tech_id} is at version {latest}, cannot save version {version.version_no}"
            )
        path = directory / f"card-v{version.version_no}.json"
        try:
            directory.mkdir(parents=True, exist_ok=True)
            path.write_text(
                json.dumps(codec.card_version_to_dict(version), ensure_ascii=False, indent=2) + "\n",
                encoding="utf-8",
            )
        except OSError as exc:
            raise StorageFailure(f"cannot write card document {path}: {exc}") from exc
        return path

    @staticmethod
    def _version_numbers(directory: Path) -> list[int]:
        if not directory.is_dir():
            return []
        numbers = []
        for path in directory.glob("card-v*.json"):
            stem = path.stem.removeprefix("card-v")
            if stem.isdigit():
                numbers.append(int(stem))
        return sorted(numbers)

    def load_card(self, tech_id: str) -> TrlCard:
        directory = self._card_dir(tech_id)
        numbers = self._version_numbers(directory)
        if not numbers:
            raise CardNotFound(f"no card documents for {tech_id!r}")
        if numbers != list(range(1, len(numbers) + 1)):
            raise VersionGap(f"card {tech_id} documents are not contiguous: {numbers}")
        card = TrlCard(tech_id=tech_id)
        for number in numbers:
            path = directory / f"card-v{number}.json"
            try:
                data = json.loads(path.read_text(encoding="utf-8"))
            except (OSError, ValueError) as exc:
                raise StorageFailure(f"cannot read card document {path}: {exc}") from exc
            card.versions.append(codec.card_version_from_dict(data))
        return card

    # --- policy ----------------------------------------------------------

    def load_policy(self) -> LevelPolicy:
        """Built-in defaults, overlaid by trl-policy.json when present."""
        if not self.policy_path.is_file():
            return default_policy()
        try:
            overlay = json.loads(self.policy_path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise StorageFailure(f"cannot read policy file: {exc}") from exc
        except ValueError as exc:
            raise MalformedPolicy(f"policy file is not valid JSON: {exc}") from exc
        return policy_from_overlay(overlay)

    def write_policy_overlay(self, overlay: dict[str, Any]) -> None:
        policy_from_overlay(overlay)  # validate before writing
        self.policy_path.write_text(
            json.dumps(overlay, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
        )


def replay(workspace: Workspace) -> "PortfolioState":
    """Rebuild the registry snapshot by re-validating and re-applying the log."""
    from .lifecycle import LifecycleEngine

    engine = LifecycleEngine(policy=workspace.load_policy())
    for record in workspace.read_events():
        engine.apply_record(record)
    return engine.state
