"""Repository-history event logs: parsing, bot/window filtering, review status.

The canonical on-disk format is line-delimited JSON, one record per line:

  {"kind": "commit", "sha": str, "repo": str, "author": str,
   "ts": RFC3339-UTC, "files": [str], "pr": int|null,
   "merged_by": str|null, "approvals": [str]}

  {"kind": "pr_rejected", "repo": str, "pr": int, "author": str,
   "actor": str, "ts": RFC3339-UTC}

An optional leading {"kind": "meta", ...} record carries the filter window
and diagnostics so a serialized log round-trips exactly. Records of any
other kind are tallied and skipped. Malformed lines are dropped and
tallied; a stream that is mostly garbage (>50% malformed) is rejected.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum
from typing import Iterable

from .errors import CorruptInputError, InputError, ValidationError

BOT_SUFFIX = "[bot]"

DIAGNOSTIC_KEYS = (
    "malformed",
    "unknown_kind",
    "duplicate_sha",
    "self_rejected_pr",
    "bot_actor",
    "bot_reviewer",
    "out_of_window",
)


def is_bot_login(login: str) -> bool:
    return login.endswith(BOT_SUFFIX)


@dataclass(frozen=True)
class Actor:
    """A contributor account; bot accounts carry the "[bot]" login suffix."""

    login: str

    def __post_init__(self) -> None:
        if not self.login:
            raise ValidationError("actor login must be non-empty")

    @property
    def is_bot(self) -> bool:
        return is_bot_login(self.login)


@dataclass(frozen=True)
class CommitEvent:
    sha: str
    repo: str
    author: str
    timestamp: datetime
    files: frozenset[str]
    pr_number: int | None = None
    merged_by: str | None = None
    approvals: frozenset[str] = frozenset()


@dataclass(frozen=True)
class RejectedPrEvent:
    pr_number: int
    repo: str
    author: str
    closer_or_reviewer: str
    timestamp: datetime


class ReviewStatus(Enum):
    REVIEWED = "reviewed"
    UNREVIEWED = "unreviewed"


@dataclass
class EventLog:
    commits: list[CommitEvent] = field(default_factory=list)
    rejected_prs: list[RejectedPrEvent] = field(default_factory=list)
    window_start: datetime | None = None
    window_end: datetime | None = None
    diagnostics: dict[str, int] = field(
        default_factory=lambda: {k: 0 for k in DIAGNOSTIC_KEYS}
    )

    def event_count(self) -> int:
        return len(self.commits) + len(self.rejected_prs)


def _parse_timestamp(raw: object) -> datetime:
    if not isinstance(raw, str):
        raise ValueError("timestamp must be a string")
    text = raw.replace("Z", "+00:00") if raw.endswith("Z") else raw
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is None:
        raise ValueError(f"timestamp {raw!r} has no timezone")
    return ts.astimezone(timezone.utc)


def _format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def _require_str(record: dict, key: str) -> str:
    value = record.get(key)
    if not isinstance(value, str) or not value:
        raise ValueError(f"field {key!r} missing or not a non-empty string")
    return value


def _parse_commit(record: dict) -> CommitEvent:
    files = record.get("files")
    if not isinstance(files, list) or any(not isinstance(f, str) for f in files):
        raise ValueError("field 'files' must be a list of strings")
    pr = record.get("pr")
    if pr is not None and not isinstance(pr, int):
        raise ValueError("field 'pr' must be an integer or null")
    merged_by = record.get("merged_by")
    if merged_by is not None and not isinstance(merged_by, str):
        raise ValueError("field 'merged_by' must be a string or null")
    approvals = record.get("approvals", [])
    if not isinstance(approvals, list) or any(
        not isinstance(a, str) for a in approvals
    ):
        raise ValueError("field 'approvals' must be a list of strings")
    return CommitEvent(
        sha=_require_str(record, "sha"),
        repo=_require_str(record, "repo"),
        author=_require_str(record, "author"),
        timestamp=_parse_timestamp(record.get("ts")),
        files=frozenset(files),
        pr_number=pr,
        merged_by=merged_by,
        approvals=frozenset(approvals),
    )


def _parse_rejected_pr(record: dict) -> RejectedPrEvent:
    pr = record.get("pr")
    if not isinstance(pr, int):
        raise ValueError("field 'pr' must be an integer")
    return RejectedPrEvent(
        pr_number=pr,
        repo=_require_str(record, "repo"),
        author=_require_str(record, "author"),
        closer_or_reviewer=_require_str(record, "actor"),
        timestamp=_parse_timestamp(record.get("ts")),
    )


def parse_event_log(stream: Iterable[str]) -> EventLog:
    """Parse line-delimited JSON records into an EventLog.

    Malformed lines and records violating per-record invariants are dropped
    and tallied in diagnostics; the relative order of retained events is
    preserved. Raises InputError if the stream cannot be read and
    CorruptInputError if more than half of the non-blank lines are malformed.
    """
    log = EventLog()
    seen_shas: set[str] = set()
    total_lines = 0
    malformed = 0
    try:
        for line in stream:
            line = line.strip()
            if not line:
                continue
            total_lines += 1
            try:
                record = json.loads(line)
                if not isinstance(record, dict):
                    raise ValueError("record is not a JSON object")
                kind = record.get("kind")
                if kind == "commit":
                    commit = _parse_commit(record)
                    if commit.sha in seen_shas:
                        log.diagnostics["duplicate_sha"] += 1
                        continue
                    seen_shas.add(commit.sha)
                    log.commits.append(commit)
                elif kind == "pr_rejected":
                    rejected = _parse_rejected_pr(record)
                    if rejected.author == rejected.closer_or_reviewer:
                        log.diagnostics["self_rejected_pr"] += 1
                        continue
                    log.rejected_prs.append(rejected)
                elif kind == "meta":
                    _apply_meta(log, record)
                elif isinstance(kind, str):
                    log.diagnostics["unknown_kind"] += 1
                else:
                    raise ValueError("field 'kind' missing or not a string")
            except (ValueError, TypeError):
                malformed += 1
                log.diagnostics["malformed"] += 1
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read event stream: {exc}") from exc
    if total_lines and malformed * 2 > total_lines:
        raise CorruptInputError(
            f"{malformed} of {total_lines} lines are malformed (>50%)"
        )
    return log


def _apply_meta(log: EventLog, record: dict) -> None:
    start = record.get("window_start")
    end = record.get("window_end")
    log.window_start = _parse_timestamp(start) if start is not None else None
    log.window_end = _parse_timestamp(end) if end is not None else None
    diagnostics = record.get("diagnostics")
    if isinstance(diagnostics, dict):
        for key in DIAGNOSTIC_KEYS:
            value = diagnostics.get(key, 0)
            if not isinstance(value, int) or value < 0:
                raise ValueError(f"diagnostics[{key!r}] must be a non-negative int")
            log.diagnostics[key] = value


def serialize_event_log(log: EventLog) -> str:
    """Render an EventLog back to its line-delimited JSON form.

    Emits a meta record first so window and diagnostics survive a round
    trip: parse(serialize(log)) == log.
    """
    lines = []
    meta = {
        "kind": "meta",
        "window_start": (
            _format_timestamp(log.window_start) if log.window_start else None
        ),
        "window_end": _format_timestamp(log.window_end) if log.window_end else None,
        "diagnostics": {k: log.diagnostics.get(k, 0) for k in DIAGNOSTIC_KEYS},
    }
    lines.append(json.dumps(meta, sort_keys=True))
    for c in log.commits:
        lines.append(
            json.dumps(
                {
                    "kind": "commit",
                    "sha": c.sha,
                    "repo": c.repo,
                    "author": c.author,
                    "ts": _format_timestamp(c.timestamp),
                    "files": sorted(c.files),
                    "pr": c.pr_number,
                    "merged_by": c.merged_by,
                    "approvals": sorted(c.approvals),
                },
                sort_keys=True,
            )
        )
    for r in log.rejected_prs:
        lines.append(
            json.dumps(
                {
                    "kind": "pr_rejected",
                    "repo": r.repo,
                    "pr": r.pr_number,
                    "author": r.author,
                    "actor": r.closer_or_reviewer,
                    "ts": _format_timestamp(r.timestamp),
                },
                sort_keys=True,
            )
        )
    return "\n".join(lines) + "\n"


def filter_actors_and_window(
    log: EventLog, start: datetime, end: datetime
) -> EventLog:
    """Drop bot-actor events and events outside the half-open window [start, end).

    Bot mentions in a retained commit's approvals or merged_by are stripped
    rather than dropping the commit. Each event is checked bot-first, so the
    dropped-event set is the same regardless of which filter is thought of
    as running first.
    """
    if start >= end:
        raise ValidationError("window start must precede window end")
    out = EventLog(window_start=start, window_end=end)
    out.diagnostics = dict(log.diagnostics)
    for c in log.commits:
        if is_bot_login(c.author):
            out.diagnostics["bot_actor"] += 1
            continue
        if not (start <= c.timestamp < end):
            out.diagnostics["out_of_window"] += 1
            continue
        bot_approvals = {a for a in c.approvals if is_bot_login(a)}
        bot_merger = c.merged_by is not None and is_bot_login(c.merged_by)
        if bot_approvals or bot_merger:
            out.diagnostics["bot_reviewer"] += len(bot_approvals) + int(bot_merger)
            c = replace(
                c,
                approvals=c.approvals - bot_approvals,
                merged_by=None if bot_merger else c.merged_by,
            )
        out.commits.append(c)
    for r in log.rejected_prs:
        if is_bot_login(r.author) or is_bot_login(r.closer_or_reviewer):
            out.diagnostics["bot_actor"] += 1
            continue
        if not (start <= r.timestamp < end):
            out.diagnostics["out_of_window"] += 1
            continue
        out.rejected_prs.append(r)
    return out


def classify_review_status(commit: CommitEvent) -> ReviewStatus:
    """A commit counts as reviewed only when a different developer signed off.

    Reviewed iff some approver other than the author approved the associated
    pull request, or the commit was merged by someone other than the author.
    Self-approval and self-merge do not count.
    """
    if any(a != commit.author for a in commit.approvals):
        return ReviewStatus.REVIEWED
    if commit.merged_by is not None and commit.merged_by != commit.author:
        return ReviewStatus.REVIEWED
    return ReviewStatus.UNREVIEWED


def reviewed_fraction(log: EventLog) -> float:
    """Fraction of commits classified as reviewed; 0.0 for an empty log."""
    if not log.commits:
        return 0.0
    reviewed = sum(
        1
        for c in log.commits
        if classify_review_status(c) is ReviewStatus.REVIEWED
    )
    return reviewed / len(log.commits)
