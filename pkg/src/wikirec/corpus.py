"""Canonical data model and line-delimited trace ingestion.

A corpus is an immutable in-memory snapshot of one community's traces:
editor registrations, edits, articles, projects, and editor-to-editor
interactions, plus an explicit ``as_of`` instant that stands in for "now"
in every window computation. Loading validates referential integrity and
rejects malformed records with file/line context.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Iterator

UTC_FORMAT = "%Y-%m-%dT%H:%M:%SZ"

INTERACTION_KINDS = ("talk_message", "co_edit", "thanks")

EDITORS_FILE = "editors.jsonl"
EDITS_FILE = "edits.jsonl"
ARTICLES_FILE = "articles.jsonl"
PROJECTS_FILE = "projects.jsonl"
INTERACTIONS_FILE = "interactions.jsonl"
META_FILE = "meta.json"


class CorpusError(Exception):
    """A trace file violates the record format or an integrity rule."""


def parse_utc(value: str) -> datetime:
    """Parse an ISO-8601 UTC instant ('...Z' or '...+00:00'), second precision."""
    if not isinstance(value, str):
        raise ValueError(f"timestamp must be a string, got {type(value).__name__}")
    text = value.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        raise ValueError(f"timestamp {value!r} has no UTC offset")
    return dt.astimezone(timezone.utc).replace(microsecond=0)


def format_utc(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).strftime(UTC_FORMAT)


def epoch_seconds(dt: datetime) -> int:
    return int(dt.timestamp())


@dataclass(frozen=True)
class EditEvent:
    """One edit by an editor to an article; ``reverted`` means it was later undone."""

    editor_id: str
    article_id: str
    timestamp: datetime
    reverted: bool = False


@dataclass(frozen=True)
class Article:
    article_id: str
    categories: frozenset[str] = frozenset()
    in_scope_of: frozenset[str] = frozenset()


@dataclass(frozen=True)
class Project:
    project_id: str
    name: str
    members: frozenset[str] = frozenset()
    organizers: frozenset[str] = frozenset()


@dataclass(frozen=True)
class Interaction:
    source: str
    target: str
    timestamp: datetime
    kind: str


@dataclass(eq=False)
class Corpus:
    """Immutable-after-load snapshot; safe to share read-only across workers."""

    editors: dict[str, datetime]  # editor_id -> registered_at
    edits: list[EditEvent]  # ascending by timestamp, ties in input order
    articles: dict[str, Article]
    projects: dict[str, Project]
    interactions: list[Interaction]
    as_of: datetime

    def counts(self) -> dict[str, int]:
        return {
            "editors": len(self.editors),
            "edits": len(self.edits),
            "articles": len(self.articles),
            "projects": len(self.projects),
            "interactions": len(self.interactions),
        }

    def truncated(self, as_of: datetime) -> "Corpus":
        """Snapshot visible strictly before ``as_of`` (editors registered by it)."""
        return Corpus(
            editors={e: r for e, r in self.editors.items() if r <= as_of},
            edits=[e for e in self.edits if e.timestamp < as_of],
            articles=self.articles,
            projects=self.projects,
            interactions=[i for i in self.interactions if i.timestamp < as_of],
            as_of=as_of,
        )

    def validate(self) -> None:
        """Re-check every integrity invariant; raises CorpusError on the first hit."""
        for e in self.edits:
            if e.editor_id not in self.editors:
                raise CorpusError(f"edit references unknown editor {e.editor_id!r}")
            if e.article_id not in self.articles:
                raise CorpusError(f"edit references unknown article {e.article_id!r}")
            if e.timestamp > self.as_of:
                raise CorpusError(
                    f"edit timestamp {format_utc(e.timestamp)} is after as_of"
                )
        for article in self.articles.values():
            for pid in article.in_scope_of:
                if pid not in self.projects:
                    raise CorpusError(
                        f"article {article.article_id!r} in scope of unknown project {pid!r}"
                    )
        for project in self.projects.values():
            if not project.organizers <= project.members:
                bad = sorted(project.organizers - project.members)
                raise CorpusError(
                    f"project {project.project_id!r} organizer {bad[0]!r} is not a member"
                )
            for member in project.members:
                if member not in self.editors:
                    raise CorpusError(
                        f"project {project.project_id!r} member {member!r} is not a registered editor"
                    )
        for i in self.interactions:
            if i.source == i.target:
                raise CorpusError(f"interaction with source == target ({i.source!r})")
            for eid in (i.source, i.target):
                if eid not in self.editors:
                    raise CorpusError(f"interaction references unknown editor {eid!r}")
        prev = None
        for e in self.edits:
            if prev is not None and e.timestamp < prev:
                raise CorpusError("edits are not sorted by timestamp")
            prev = e.timestamp


@dataclass(frozen=True)
class CorpusPaths:
    editors: Path
    edits: Path
    articles: Path
    projects: Path
    interactions: Path

    @classmethod
    def in_dir(cls, root: str | Path) -> "CorpusPaths":
        root = Path(root)
        return cls(
            editors=root / EDITORS_FILE,
            edits=root / EDITS_FILE,
            articles=root / ARTICLES_FILE,
            projects=root / PROJECTS_FILE,
            interactions=root / INTERACTIONS_FILE,
        )


def _iter_records(path: Path) -> Iterator[tuple[int, dict]]:
    with path.open("r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                record = json.loads(text)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: invalid JSON: {exc.msg}") from exc
            if not isinstance(record, dict):
                raise CorpusError(f"{path}:{lineno}: record is not a JSON object")
            yield lineno, record


def _get(record: dict, path: Path, lineno: int, field_name: str, kind: type):
    if field_name not in record:
        raise CorpusError(f"{path}:{lineno}: missing field {field_name!r}")
    value = record[field_name]
    if kind is str and (not isinstance(value, str) or not value):
        raise CorpusError(f"{path}:{lineno}: field {field_name!r} must be a non-empty string")
    if kind is bool and not isinstance(value, bool):
        raise CorpusError(f"{path}:{lineno}: field {field_name!r} must be a boolean")
    if kind is list and not isinstance(value, list):
        raise CorpusError(f"{path}:{lineno}: field {field_name!r} must be an array")
    return value


def _get_ts(record: dict, path: Path, lineno: int, field_name: str) -> datetime:
    raw = _get(record, path, lineno, field_name, str)
    try:
        return parse_utc(raw)
    except ValueError as exc:
        raise CorpusError(f"{path}:{lineno}: field {field_name!r}: {exc}") from exc


def _str_list(record: dict, path: Path, lineno: int, field_name: str) -> list[str]:
    values = _get(record, path, lineno, field_name, list)
    for v in values:
        if not isinstance(v, str) or not v:
            raise CorpusError(
                f"{path}:{lineno}: field {field_name!r} must contain non-empty strings"
            )
    return values


def load_corpus(paths: CorpusPaths | str | Path, as_of: datetime | None = None) -> Corpus:
    """Load and validate the five trace files into a Corpus.

    Pure with respect to file content: the same bytes always produce an
    equal corpus. Edits are re-sorted ascending by timestamp (stable, so
    equal timestamps keep file order). When as_of is omitted it comes from
    the meta file written alongside the corpus.
    """
    if not isinstance(paths, CorpusPaths):
        paths = CorpusPaths.in_dir(paths)
    if as_of is None:
        as_of = read_meta_as_of(paths.editors.parent)
        if as_of is None:
            raise CorpusError(
                f"no as_of given and no readable {META_FILE} next to {paths.editors}"
            )
    as_of = as_of.astimezone(timezone.utc).replace(microsecond=0)

    for p in (paths.editors, paths.edits, paths.articles, paths.projects, paths.interactions):
        if not p.exists():
            raise CorpusError(f"missing corpus file: {p}")

    editors: dict[str, datetime] = {}
    for lineno, rec in _iter_records(paths.editors):
        eid = _get(rec, paths.editors, lineno, "editor_id", str)
        if eid in editors:
            raise CorpusError(f"{paths.editors}:{lineno}: duplicate editor_id {eid!r}")
        editors[eid] = _get_ts(rec, paths.editors, lineno, "registered_at")

    articles: dict[str, Article] = {}
    scope_refs: list[tuple[int, str, str]] = []  # (lineno, article_id, project_id)
    for lineno, rec in _iter_records(paths.articles):
        aid = _get(rec, paths.articles, lineno, "article_id", str)
        if aid in articles:
            raise CorpusError(f"{paths.articles}:{lineno}: duplicate article_id {aid!r}")
        cats = frozenset(_str_list(rec, paths.articles, lineno, "categories"))
        scope = _str_list(rec, paths.articles, lineno, "in_scope_of")
        for pid in scope:
            scope_refs.append((lineno, aid, pid))
        articles[aid] = Article(aid, cats, frozenset(scope))

    projects: dict[str, Project] = {}
    for lineno, rec in _iter_records(paths.projects):
        pid = _get(rec, paths.projects, lineno, "project_id", str)
        if pid in projects:
            raise CorpusError(f"{paths.projects}:{lineno}: duplicate project_id {pid!r}")
        name = _get(rec, paths.projects, lineno, "name", str)
        members = frozenset(_str_list(rec, paths.projects, lineno, "members"))
        organizers = frozenset(_str_list(rec, paths.projects, lineno, "organizers"))
        if not organizers <= members:
            bad = sorted(organizers - members)[0]
            raise CorpusError(
                f"{paths.projects}:{lineno}: organizer {bad!r} is not listed in members"
            )
        for member in sorted(members):
            if member not in editors:
                raise CorpusError(
                    f"{paths.projects}:{lineno}: member {member!r} is not a registered editor"
                )
        projects[pid] = Project(pid, name, members, organizers)

    for lineno, aid, pid in scope_refs:
        if pid not in projects:
            raise CorpusError(
                f"{paths.articles}:{lineno}: article {aid!r} in scope of unknown project {pid!r}"
            )

    edits: list[EditEvent] = []
    for lineno, rec in _iter_records(paths.edits):
        eid = _get(rec, paths.edits, lineno, "editor_id", str)
        aid = _get(rec, paths.edits, lineno, "article_id", str)
        ts = _get_ts(rec, paths.edits, lineno, "timestamp")
        reverted = _get(rec, paths.edits, lineno, "reverted", bool)
        if eid not in editors:
            raise CorpusError(f"{paths.edits}:{lineno}: unknown editor {eid!r}")
        if aid not in articles:
            raise CorpusError(f"{paths.edits}:{lineno}: unknown article {aid!r}")
        if ts > as_of:
            raise CorpusError(
                f"{paths.edits}:{lineno}: timestamp {format_utc(ts)} is after as_of"
            )
        edits.append(EditEvent(eid, aid, ts, reverted))
    edits.sort(key=lambda e: e.timestamp)  # stable: ties keep file order

    interactions: list[Interaction] = []
    for lineno, rec in _iter_records(paths.interactions):
        src = _get(rec, paths.interactions, lineno, "source", str)
        dst = _get(rec, paths.interactions, lineno, "target", str)
        ts = _get_ts(rec, paths.interactions, lineno, "timestamp")
        kind = _get(rec, paths.interactions, lineno, "kind", str)
        if kind not in INTERACTION_KINDS:
            raise CorpusError(
                f"{paths.interactions}:{lineno}: field 'kind' must be one of {INTERACTION_KINDS}"
            )
        if src == dst:
            raise CorpusError(f"{paths.interactions}:{lineno}: source == target ({src!r})")
        for eid in (src, dst):
            if eid not in editors:
                raise CorpusError(f"{paths.interactions}:{lineno}: unknown editor {eid!r}")
        if ts > as_of:
            raise CorpusError(
                f"{paths.interactions}:{lineno}: timestamp {format_utc(ts)} is after as_of"
            )
        interactions.append(Interaction(src, dst, ts, kind))

    for eid, reg in editors.items():
        if reg > as_of:
            raise CorpusError(f"editor {eid!r} registered after as_of")

    return Corpus(editors, edits, articles, projects, interactions, as_of)


def dump_line(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def write_corpus(corpus: Corpus, root: str | Path) -> CorpusPaths:
    """Write normalized trace files (plus meta.json carrying as_of).

    Output is deterministic: editors/articles/projects sorted by id,
    edits in timestamp order, interactions in timestamp order.
    """
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    paths = CorpusPaths.in_dir(root)

    with paths.editors.open("w", encoding="utf-8") as f:
        for eid in sorted(corpus.editors):
            f.write(dump_line({"editor_id": eid, "registered_at": format_utc(corpus.editors[eid])}) + "\n")

    with paths.edits.open("w", encoding="utf-8") as f:
        for e in corpus.edits:
            f.write(
                dump_line(
                    {
                        "editor_id": e.editor_id,
                        "article_id": e.article_id,
                        "timestamp": format_utc(e.timestamp),
                        "reverted": e.reverted,
                    }
                )
                + "\n"
            )

    with paths.articles.open("w", encoding="utf-8") as f:
        for aid in sorted(corpus.articles):
            a = corpus.articles[aid]
            f.write(
                dump_line(
                    {
                        "article_id": aid,
                        "categories": sorted(a.categories),
                        "in_scope_of": sorted(a.in_scope_of),
                    }
                )
                + "\n"
            )

    with paths.projects.open("w", encoding="utf-8") as f:
        for pid in sorted(corpus.projects):
            p = corpus.projects[pid]
            f.write(
                dump_line(
                    {
                        "project_id": pid,
                        "name": p.name,
                        "members": sorted(p.members),
                        "organizers": sorted(p.organizers),
                    }
                )
                + "\n"
            )

    with paths.interactions.open("w", encoding="utf-8") as f:
        for i in sorted(corpus.interactions, key=lambda x: (x.timestamp, x.source, x.target, x.kind)):
            f.write(
                dump_line(
                    {
                        "source": i.source,
                        "target": i.target,
                        "timestamp": format_utc(i.timestamp),
                        "kind": i.kind,
                    }
                )
                + "\n"
            )

    (root / META_FILE).write_text(
        dump_line({"as_of": format_utc(corpus.as_of)}) + "\n", encoding="utf-8"
    )
    return paths


def read_meta_as_of(root: str | Path) -> datetime | None:
    meta = Path(root) / META_FILE
    if not meta.exists():
        return None
    data = json.loads(meta.read_text(encoding="utf-8"))
    return parse_utc(data["as_of"])
