"""Operator command line over a local workspace.

Every command maps 1:1 to a domain operation. Exit code 0 on success;
domain failures print `error: <Code>: <message>` to stderr and exit 1.
Read commands accept --json for machine-readable output.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import analytics, codec
from .demo import seed_demo
from .errors import TrlError
from .lifecycle import LifecycleEngine, open_engine
from .model import CardVersion, ReviewOutcome, TaskItem, format_semver
from .risks import DEFAULT_SCORECARD_ITEMS
from .store import Workspace


def _workspace_root(args: argparse.Namespace) -> Path:
    root = args.workspace or os.environ.get("TRL_WORKSPACE") or "."
    return Path(root)


def _engine(args: argparse.Namespace) -> LifecycleEngine:
    return open_engine(Workspace(_workspace_root(args)))


def _table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [len(h) for h in headers]
    for row in rows:
        for index, cell in enumerate(row):
            widths[index] = max(widths[index], len(cell))
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)).rstrip()]
    lines.append("  ".join("-" * widths[i] for i in range(len(headers))).rstrip())
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
    return "\n".join(lines)


def _emit(data, as_json: bool, text: str) -> None:
    if as_json:
        print(json.dumps(data, indent=2, ensure_ascii=False))
    else:
        print(text)


def _parse_panel(entries: list[str]) -> list[tuple[str, str]]:
    panel = []
    for entry in entries:
        role, _, person = entry.partition("=")
        if not role or not person:
            raise TrlError(f"panel entries are role=person, got {entry!r}")
        panel.append((person.strip(), role.strip()))
    return panel


def _parse_ts(raw: str | None) -> datetime:
    if raw is None:
        return datetime.now(timezone.utc)
    return codec.ts_from_text(raw)


# ---------------------------------------------------------------------------
# command handlers
# ---------------------------------------------------------------------------


def cmd_init(args: argparse.Namespace) -> None:
    workspace = Workspace.create(args.directory)
    if args.demo:
        seed_demo(workspace)
        print(f"initialized demo workspace at {workspace.root}")
    else:
        print(f"initialized workspace at {workspace.root}")


def cmd_tech_add(args: argparse.Namespace) -> None:
    engine = _engine(args)
    tech = engine.register_technology(
        name=args.name,
        kind=args.kind,
        initiation_level=args.level,
        justification=args.why or "",
        components=args.component or [],
        tech_id=args.id,
    )
    print(tech.id)


def cmd_tech_list(args: argparse.Namespace) -> None:
    engine = _engine(args)
    rows = []
    data = []
    for tech in engine.state.technologies.values():
        if args.level is not None and tech.current_level != args.level:
            continue
        if args.kind and tech.kind.value != args.kind:
            continue
        pending = engine.pending_proposal(tech.id)
        entry = {
            **codec.technology_to_dict(tech),
            "system_trl": engine.system_trl_of(tech.id),
            "pending_proposal": pending.id if pending else None,
            "flagged_risk_count": len(engine.flagged_risks(tech.id)),
        }
        data.append(entry)
        rows.append(
            [
                tech.id,
                tech.name,
                tech.kind.value,
                str(tech.current_level),
                str(entry["system_trl"]),
                tech.status.value,
                entry["pending_proposal"] or "-",
                str(entry["flagged_risk_count"]),
            ]
        )
    text = _table(["id", "name", "kind", "level", "system-trl", "status", "pending", "flagged"], rows)
    _emit({"technologies": data}, args.json, text)


def cmd_tech_archive(args: argparse.Namespace) -> None:
    engine = _engine(args)
    tech = engine.archive_technology(args.tech)
    print(f"{tech.id} archived")


def _render_card_version(engine: LifecycleEngine, tech_id: str, version: CardVersion, total: int) -> str:
    tech = engine.tech(tech_id)
    rule = engine.policy.rule(tech.current_level)
    info = version.project_info
    knowledge = version.implicit_knowledge
    lines = [
        f"TRL Card: {tech.name} ({tech.id})  [version {version.version_no} of {total}]",
        f"level: {tech.current_level} - {rule.name} | kind: {tech.kind.value} | status: {info.status}",
        f"owners: {', '.join(info.owners) or '-'}",
        f"reviewers: {', '.join(info.reviewers) or '-'}",
        (
            f"versions: code {format_semver(info.code_version)}, "
            f"model {format_semver(info.model_version)}, data {format_semver(info.data_version)}"
        ),
    ]
    if version.annotation:
        lines.append(f"annotation: {version.annotation}")

    def bullets(heading: str, items: list[str]) -> None:
        lines.append(f"{heading}:")
        if items:
            lines.extend(f"  - {item}" for item in items)
        else:
            lines.append("  (none)")

    bullets("modeling assumptions", knowledge.modeling_assumptions)
    bullets("dataset biases", knowledge.dataset_biases)
    bullets("corner cases", knowledge.corner_cases)
    lines.append("deliverables:")
    for level in sorted(version.deliverables):
        for record in version.deliverables[level]:
            title = f" [{record.title}]" if record.title else ""
            lines.append(f"  L{level} {record.section_id}{title}: {record.uri_or_text}")
    if not version.deliverables:
        lines.append("  (none)")
    return "\n".join(lines)


def cmd_card_show(args: argparse.Namespace) -> None:
    engine = _engine(args)
    card = engine.card(args.tech)
    if args.version is not None:
        matches = [v for v in card.versions if v.version_no == args.version]
        if not matches:
            raise TrlError(f"card has no version {args.version}")
        version = matches[0]
    else:
        version = card.latest()
    _emit(
        codec.card_version_to_dict(version),
        args.json,
        _render_card_version(engine, args.tech, version, len(card.versions)),
    )


def cmd_card_set(args: argparse.Namespace) -> None:
    engine = _engine(args)
    version = engine.amend_card(args.tech, args.section, args.text, title=args.title or "", level=args.level)
    print(f"{args.tech} card now at version {version.version_no}")


def cmd_propose(args: argparse.Namespace) -> None:
    engine = _engine(args)
    proposal = engine.propose_graduation(args.tech, to_level=args.to)
    print(proposal.id)


def cmd_review(args: argparse.Namespace) -> None:
    engine = _engine(args)
    if args.graduate == args.do_return:
        raise TrlError("choose exactly one of --graduate / --return")
    outcome = ReviewOutcome.GRADUATE if args.graduate else ReviewOutcome.RETURN
    review = engine.record_review(
        args.proposal,
        panel=_parse_panel(args.panel or []),
        outcome=outcome,
        tasks=[TaskItem(description=task) for task in (args.task or [])],
        notes=args.notes or "",
    )
    tech = engine.tech(review.tech_id)
    if outcome is ReviewOutcome.GRADUATE:
        print(f"{review.id}: {tech.id} graduated to level {tech.current_level}")
    else:
        print(f"{review.id}: returned with {len(review.tasks)} task(s); {tech.id} stays at level {tech.current_level}")


def cmd_postmortem(args: argparse.Namespace) -> None:
    engine = _engine(args)
    review = engine.record_postmortem(args.review, args.notes)
    print(f"post-mortem recorded on {review.id}")


def cmd_regress(args: argparse.Namespace) -> None:
    engine = _engine(args)
    transition = engine.regress(args.tech, args.to, args.why)
    print(f"{args.tech} regressed {transition.from_level} -> {transition.to_level}")


def cmd_fork(args: argparse.Namespace) -> None:
    engine = _engine(args)
    child = engine.fork_technology(args.parent, args.name, args.level, rationale=args.why or "", child_id=args.id)
    print(child.id)


def cmd_req_add(args: argparse.Namespace) -> None:
    engine = _engine(args)
    requirement = engine.add_requirement(args.tech, args.desc, args.verify, args.validate)
    print(requirement.id)


def cmd_risk_add(args: argparse.Namespace) -> None:
    engine = _engine(args)
    engine.tech(args.tech)
    entry = engine.add_risk(
        args.req,
        p_failure=args.p,
        value=args.value,
        sim_to_real=args.sim_to_real,
        mitigation=args.mitigation,
        test_strategy=args.strategy,
    )
    flagged = "flagged" if entry.risk >= engine.policy.flag_threshold else "not flagged"
    print(f"{entry.id}: risk {entry.risk:.2f} ({flagged})")


def cmd_risk_list(args: argparse.Namespace) -> None:
    engine = _engine(args)
    threshold = engine.policy.flag_threshold if args.threshold is None else args.threshold
    entries = engine.flagged_risks(args.tech, threshold) if args.flagged else engine.risks_for(args.tech)
    rows = [
        [
            entry.id,
            entry.requirement_id,
            f"{entry.p_failure:.2f}",
            str(entry.value),
            f"{entry.risk:.2f}",
            "yes" if entry.risk >= threshold else "no",
            "yes" if entry.sim_to_real else "no",
            (entry.mitigation or "-"),
        ]
        for entry in entries
    ]
    data = [{**codec.risk_to_dict(e), "flagged": e.risk >= threshold} for e in entries]
    _emit(
        {"risks": data},
        args.json,
        _table(["id", "requirement", "p", "value", "risk", "flagged", "sim-to-real", "mitigation"], rows),
    )


def cmd_scorecard_set(args: argparse.Namespace) -> None:
    engine = _engine(args)
    defaults = dict(DEFAULT_SCORECARD_ITEMS)
    items: list[dict] = []
    if args.all is not None:
        items = [{"item_id": item_id, "description": desc, "score": args.all} for item_id, desc in DEFAULT_SCORECARD_ITEMS]
    for entry in args.score or []:
        item_id, _, raw = entry.partition("=")
        if not item_id or not raw:
            raise TrlError(f"scores are item=score, got {entry!r}")
        try:
            score = int(raw)
        except ValueError:
            raise TrlError(f"score for {item_id!r} is not an integer: {raw!r}") from None
        items = [item for item in items if item["item_id"] != item_id]
        items.append({"item_id": item_id, "description": defaults.get(item_id, ""), "score": score})
    card = engine.attach_scorecard(args.tech, items)
    print(f"{card.id}: total {card.total} over {len(card.items)} item(s)")


def cmd_gates(args: argparse.Namespace) -> None:
    engine = _engine(args)
    report = engine.readiness(args.tech)
    checks = engine.gate_checks(args.tech)
    rows = [[c.gate_id, "yes" if c.satisfied else "NO", c.evidence or "-"] for c in checks]
    text_lines = []
    if report.missing:
        text_lines.append(f"missing card sections: {', '.join(report.missing)}")
    else:
        text_lines.append("card sections complete")
    text_lines.append(_table(["gate", "satisfied", "evidence"], rows) if rows else "no gates at this level")
    _emit(
        {
            "missing_sections": report.missing,
            "graduation_ready": report.graduation_ready,
            "gates": [codec.gate_check_to_dict(c) for c in checks],
        },
        args.json,
        "\n".join(text_lines),
    )


def _fmt_duration(seconds: float) -> str:
    days, rem = divmod(int(seconds), 86400)
    hours, rem = divmod(rem, 3600)
    minutes, secs = divmod(rem, 60)
    if days:
        return f"{days}d{hours:02}h"
    if hours:
        return f"{hours}h{minutes:02}m"
    return f"{minutes}m{secs:02}s"


def cmd_report_time(args: argparse.Namespace) -> None:
    engine = _engine(args)
    now = _parse_ts(args.now) if args.now else (engine.state.last_ts or datetime.now(timezone.utc))
    rows = []
    data = []
    for tech_id, events in sorted(engine.events_by_tech().items()):
        report = analytics.time_per_level(events, now)
        for level in sorted(report.per_level):
            dwell = report.per_level[level]
            rows.append([tech_id, str(level), _fmt_duration(dwell.total_seconds), str(dwell.interval_count)])
        data.append(
            {
                "tech_id": tech_id,
                "per_level": {
                    str(level): {"seconds": d.total_seconds, "interval_count": d.interval_count}
                    for level, d in sorted(report.per_level.items())
                },
            }
        )
    _emit(
        {"now": codec.ts_to_text(now), "technologies": data},
        args.json,
        _table(["technology", "level", "dwell", "intervals"], rows),
    )


def cmd_report_paths(args: argparse.Namespace) -> None:
    engine = _engine(args)
    grams = analytics.frequent_paths(engine.events_by_tech(), args.n)
    rows = [["->".join(str(level) for level in gram), str(count)] for gram, count in grams]
    _emit(
        {"n": args.n, "paths": [{"levels": list(g), "count": c} for g, c in grams]},
        args.json,
        _table(["path", "count"], rows),
    )


def cmd_report_bottlenecks(args: argparse.Namespace) -> None:
    engine = _engine(args)
    now = _parse_ts(args.now) if args.now else (engine.state.last_ts or datetime.now(timezone.utc))
    report = analytics.bottleneck_report(engine.events_by_tech(), now)
    rows = [
        [str(row.level), _fmt_duration(row.median_dwell.total_seconds()), str(row.tech_count)]
        for row in report
    ]
    _emit(
        {
            "now": codec.ts_to_text(now),
            "levels": [
                {"level": r.level, "median_seconds": r.median_dwell.total_seconds(), "tech_count": r.tech_count}
                for r in report
            ],
        },
        args.json,
        _table(["level", "median dwell", "technologies"], rows),
    )


def cmd_report_okr(args: argparse.Namespace) -> None:
    engine = _engine(args)
    now = _parse_ts(args.now)
    engine.tech(args.tech)
    verdict = analytics.okr_check(engine.transitions_for(args.tech), args.target, codec.ts_from_text(args.by), now)
    _emit({"tech_id": args.tech, "target_level": args.target, "verdict": verdict}, args.json, verdict)


def cmd_serve(args: argparse.Namespace) -> None:
    import uvicorn

    from .service import create_app

    addr = args.addr or os.environ.get("TRL_ADDR") or "127.0.0.1:8000"
    host, _, port = addr.rpartition(":")
    static = args.static or os.environ.get("TRL_DASHBOARD")
    if static is None:
        candidate = Path.cwd() / "frontend" / "dist"
        static = str(candidate) if candidate.is_dir() else None
    app = create_app(_workspace_root(args), static_dir=static)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trl", description="Readiness-level lifecycle governance")
    parser.add_argument("-w", "--workspace", help="workspace directory (default: $TRL_WORKSPACE or .)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", help="create a workspace")
    p.add_argument("directory")
    p.add_argument("--demo", action="store_true", help="seed the demo portfolio")
    p.set_defaults(func=cmd_init)

    tech = sub.add_parser("tech", help="technology registry").add_subparsers(dest="subcommand", required=True)
    p = tech.add_parser("add", help="register a technology")
    p.add_argument("--name", required=True)
    p.add_argument("--kind", required=True, choices=["model", "algorithm", "data-pipeline", "software-module", "composition"])
    p.add_argument("--level", required=True, type=int, help="initiation level 0-9")
    p.add_argument("--why", help="justification when starting above level 0")
    p.add_argument("--component", action="append", help="component id (repeatable, compositions only)")
    p.add_argument("--id", help="explicit id (default: slug of the name)")
    p.set_defaults(func=cmd_tech_add)
    p = tech.add_parser("list", help="list technologies")
    p.add_argument("--level", type=int)
    p.add_argument("--kind")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_tech_list)
    p = tech.add_parser("archive", help="archive a technology")
    p.add_argument("tech")
    p.set_defaults(func=cmd_tech_archive)

    card = sub.add_parser("card", help="TRL cards").add_subparsers(dest="subcommand", required=True)
    p = card.add_parser("show", help="render a card version")
    p.add_argument("tech")
    p.add_argument("--version", type=int)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_card_show)
    p = card.add_parser("set", help="amend or add a card section (new version)")
    p.add_argument("tech")
    p.add_argument("--section", required=True)
    p.add_argument("--text", required=True)
    p.add_argument("--title")
    p.add_argument("--level", type=int, help="attach level for deliverables (default: current)")
    p.set_defaults(func=cmd_card_set)

    p = sub.add_parser("propose", help="propose graduation out of the current level")
    p.add_argument("tech")
    p.add_argument("--to", type=int, help="target level (default: current + 1)")
    p.set_defaults(func=cmd_propose)

    p = sub.add_parser("review", help="record a level review")
    p.add_argument("proposal")
    p.add_argument("--graduate", action="store_true")
    p.add_argument("--return", dest="do_return", action="store_true")
    p.add_argument("--task", action="append", help="task for a Return outcome (repeatable)")
    p.add_argument("--panel", action="append", help="panel member as role=person (repeatable)")
    p.add_argument("--notes")
    p.set_defaults(func=cmd_review)

    p = sub.add_parser("postmortem", help="record a post-mortem on a graduation review")
    p.add_argument("review")
    p.add_argument("--notes", required=True)
    p.set_defaults(func=cmd_postmortem)

    p = sub.add_parser("regress", help="dial a technology back to a lower level")
    p.add_argument("tech")
    p.add_argument("--to", required=True, type=int)
    p.add_argument("--why", required=True)
    p.set_defaults(func=cmd_regress)

    p = sub.add_parser("fork", help="fork a technology (level-2 bifurcation and friends)")
    p.add_argument("parent")
    p.add_argument("--name", required=True)
    p.add_argument("--level", required=True, type=int)
    p.add_argument("--why")
    p.add_argument("--id")
    p.set_defaults(func=cmd_fork)

    req = sub.add_parser("req", help="technical requirements").add_subparsers(dest="subcommand", required=True)
    p = req.add_parser("add", help="add a requirement")
    p.add_argument("tech")
    p.add_argument("--desc", required=True)
    p.add_argument("--verify", required=True, help="how we check it was built right")
    p.add_argument("--validate", required=True, help="how we check it is the right thing")
    p.set_defaults(func=cmd_req_add)

    risk = sub.add_parser("risk", help="risk register").add_subparsers(dest="subcommand", required=True)
    p = risk.add_parser("add", help="add a quantified risk to a requirement")
    p.add_argument("tech")
    p.add_argument("--req", required=True)
    p.add_argument("-p", required=True, type=float, help="probability of failure in [0,1]")
    p.add_argument("-v", "--value", required=True, type=int, help="component value 1-10")
    p.add_argument("--sim-to-real", action="store_true")
    p.add_argument("--mitigation")
    p.add_argument("--strategy", help="test strategy")
    p.set_defaults(func=cmd_risk_add)
    p = risk.add_parser("list", help="list risks")
    p.add_argument("tech")
    p.add_argument("--flagged", action="store_true")
    p.add_argument("--threshold", type=float)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_risk_list)

    score = sub.add_parser("scorecard", help="test scorecard").add_subparsers(dest="subcommand", required=True)
    p = score.add_parser("set", help="attach a scorecard")
    p.add_argument("tech")
    p.add_argument("--score", action="append", help="item=score (repeatable)")
    p.add_argument("--all", type=int, help="score every default checklist item at N")
    p.set_defaults(func=cmd_scorecard_set)

    p = sub.add_parser("gates", help="show gate and card readiness for graduation")
    p.add_argument("tech")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_gates)

    report = sub.add_parser("report", help="portfolio analytics").add_subparsers(dest="subcommand", required=True)
    p = report.add_parser("time-per-level")
    p.add_argument("--now", help="close open intervals at this RFC3339 time (default: last event)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_report_time)
    p = report.add_parser("paths")
    p.add_argument("--n", type=int, default=2, help="n-gram length (default 2)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_report_paths)
    p = report.add_parser("bottlenecks")
    p.add_argument("--now")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_report_bottlenecks)
    p = report.add_parser("okr")
    p.add_argument("tech")
    p.add_argument("--target", required=True, type=int)
    p.add_argument("--by", required=True, help="deadline, RFC3339")
    p.add_argument("--now", help="evaluation time (default: wall clock)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_report_okr)

    p = sub.add_parser("serve", help="serve the HTTP API and dashboard")
    p.add_argument("--addr", help="host:port (default: $TRL_ADDR or 127.0.0.1:8000)")
    p.add_argument("--static", help="dashboard asset directory (default: ./frontend/dist)")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except TrlError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return 1
    except BrokenPipeError:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
