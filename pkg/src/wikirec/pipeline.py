"""Weekly batch generation over a project roster, with issue-once history.

A batch holds eight cells (four algorithms x two pools). The ledger is the
append-only record of every issued (project, editor) recommendation and is
what keeps later batches from re-recommending the same editor to the same
project. Batches and ledger rows persist as one JSON object per line;
files are the audit surface and round-trip exactly.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from datetime import datetime, timedelta
from pathlib import Path

from .config import PipelineConfig
from .corpus import Corpus, dump_line, format_utc, parse_utc
from .profiling import ExperienceTier, UnknownProjectError
from .recommenders import Algorithm, ScoredCandidate, rank_candidates

POOLS = (ExperienceTier.BRAND_NEW, ExperienceTier.MODERATELY_EXPERIENCED)

BATCHES_FILE = "batches.jsonl"
LEDGER_FILE = "ledger.jsonl"


def cell_key(algorithm: Algorithm, pool: ExperienceTier) -> str:
    return f"{algorithm.value}|{pool.value}"


def split_cell_key(key: str) -> tuple[Algorithm, ExperienceTier]:
    algo, _, pool = key.partition("|")
    return Algorithm(algo), ExperienceTier(pool)


@dataclass(frozen=True)
class Batch:
    batch_id: str
    project_id: str
    as_of: datetime
    cells: dict[str, list[ScoredCandidate]]
    config_snapshot: dict

    def to_json(self) -> dict:
        return {
            "batch_id": self.batch_id,
            "project_id": self.project_id,
            "as_of": format_utc(self.as_of),
            "cells": {
                key: [
                    {"editor_id": c.editor_id, "score": c.score, "explanation": c.explanation}
                    for c in candidates
                ]
                for key, candidates in sorted(self.cells.items())
            },
            "config_snapshot": self.config_snapshot,
        }

    @staticmethod
    def from_json(obj: dict) -> "Batch":
        cells = {}
        for key, entries in obj["cells"].items():
            algo, _ = split_cell_key(key)
            cells[key] = [
                ScoredCandidate(e["editor_id"], algo, e["score"], e["explanation"])
                for e in entries
            ]
        return Batch(
            batch_id=obj["batch_id"],
            project_id=obj["project_id"],
            as_of=parse_utc(obj["as_of"]),
            cells=cells,
            config_snapshot=obj["config_snapshot"],
        )


@dataclass(frozen=True)
class LedgerEntry:
    project_id: str
    editor_id: str
    batch_id: str
    algorithm: Algorithm
    pool: ExperienceTier
    score: float
    rank: int
    issued_at: datetime

    def to_json(self) -> dict:
        return {
            "project_id": self.project_id,
            "editor_id": self.editor_id,
            "batch_id": self.batch_id,
            "algorithm": self.algorithm.value,
            "pool": self.pool.value,
            "score": self.score,
            "rank": self.rank,
            "issued_at": format_utc(self.issued_at),
        }

    @staticmethod
    def from_json(obj: dict) -> "LedgerEntry":
        return LedgerEntry(
            project_id=obj["project_id"],
            editor_id=obj["editor_id"],
            batch_id=obj["batch_id"],
            algorithm=Algorithm(obj["algorithm"]),
            pool=ExperienceTier(obj["pool"]),
            score=obj["score"],
            rank=obj["rank"],
            issued_at=parse_utc(obj["issued_at"]),
        )


class RecommendationLedger:
    """Append-only issue history, optionally mirrored to a jsonl file."""

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self.entries: list[LedgerEntry] = []
        self._issued: dict[str, set[str]] = {}
        self.batch_ids: set[str] = set()
        if self.path is not None and self.path.exists():
            with self.path.open(encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        self._absorb(LedgerEntry.from_json(json.loads(line)))

    def _absorb(self, entry: LedgerEntry) -> None:
        self.entries.append(entry)
        self._issued.setdefault(entry.project_id, set()).add(entry.editor_id)
        self.batch_ids.add(entry.batch_id)

    def issued_for(self, project_id: str) -> frozenset:
        return frozenset(self._issued.get(project_id, ()))

    def append_all(self, entries: list[LedgerEntry]) -> None:
        if self.path is not None:
            with self.path.open("a", encoding="utf-8") as fh:
                for entry in entries:
                    fh.write(dump_line(entry.to_json()) + "\n")
        for entry in entries:
            self._absorb(entry)

    def __len__(self) -> int:
        return len(self.entries)


class BatchStore:
    """Append-only batch persistence keyed by batch_id."""

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self._batches: dict[str, Batch] = {}
        self._by_project: dict[str, list[str]] = {}
        if self.path is not None and self.path.exists():
            with self.path.open(encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        self._absorb(Batch.from_json(json.loads(line)))

    def _absorb(self, batch: Batch) -> None:
        self._batches[batch.batch_id] = batch
        self._by_project.setdefault(batch.project_id, []).append(batch.batch_id)

    def append(self, batch: Batch) -> None:
        if batch.batch_id in self._batches:
            raise ValueError(f"batch id already stored: {batch.batch_id}")
        if self.path is not None:
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(dump_line(batch.to_json()) + "\n")
        self._absorb(batch)

    def get(self, batch_id: str) -> Batch | None:
        return self._batches.get(batch_id)

    def for_project(self, project_id: str) -> list[Batch]:
        return [self._batches[b] for b in self._by_project.get(project_id, [])]

    def __len__(self) -> int:
        return len(self._batches)

    def __iter__(self):
        return iter(self._batches.values())


def _batch_id_for(project_id: str, as_of: datetime, taken: set[str]) -> str:
    base = f"{project_id}:{as_of.strftime('%Y%m%dT%H%M%SZ')}"
    if base not in taken:
        return base
    suffix = 2
    while f"{base}-{suffix}" in taken:
        suffix += 1
    return f"{base}-{suffix}"


def generate_batch(
    project_id: str,
    corpus: Corpus,
    as_of: datetime,
    ledger: RecommendationLedger,
    config: PipelineConfig,
    store: BatchStore | None = None,
) -> Batch:
    """One project's eight ranked cells at as_of, minus previously issued editors.

    Already-issued editors are removed before ranking, so a cell still
    fills to per_cell_n from fresh candidates when any remain. The ledger
    gains one row per issued recommendation; issued_at is the batch as_of.
    """
    if project_id not in corpus.projects:
        raise UnknownProjectError(project_id)
    if as_of > corpus.as_of:
        raise ValueError(
            f"as_of {format_utc(as_of)} is beyond corpus coverage {format_utc(corpus.as_of)}"
        )
    exclude = frozenset() if config.allow_rerecommend else ledger.issued_for(project_id)
    cells: dict[str, list[ScoredCandidate]] = {}
    for algorithm in Algorithm:
        for pool in POOLS:
            cells[cell_key(algorithm, pool)] = rank_candidates(
                project_id, pool, algorithm, corpus, as_of, config,
                config.per_cell_n, exclude=exclude,
            )
    taken = set(ledger.batch_ids)
    if store is not None:
        taken.update(b.batch_id for b in store)
    batch = Batch(
        batch_id=_batch_id_for(project_id, as_of, taken),
        project_id=project_id,
        as_of=as_of,
        cells=cells,
        config_snapshot=asdict(config),
    )
    entries = []
    for key, candidates in sorted(cells.items()):
        algorithm, pool = split_cell_key(key)
        for rank, cand in enumerate(candidates, start=1):
            entries.append(LedgerEntry(
                project_id=project_id,
                editor_id=cand.editor_id,
                batch_id=batch.batch_id,
                algorithm=algorithm,
                pool=pool,
                score=cand.score,
                rank=rank,
                issued_at=as_of,
            ))
    if store is not None:
        store.append(batch)
    ledger.append_all(entries)
    return batch


def run_schedule(
    corpus: Corpus,
    start: datetime,
    weeks: int,
    ledger: RecommendationLedger,
    config: PipelineConfig,
    store: BatchStore | None = None,
) -> list[Batch]:
    """One batch per project per week, as_of stepping by 7 days from start."""
    if weeks < 1:
        raise ValueError(f"weeks must be >= 1, got {weeks}")
    batches = []
    for week in range(weeks):
        as_of = start + timedelta(days=7 * week)
        for project_id in sorted(corpus.projects):
            batches.append(
                generate_batch(project_id, corpus, as_of, ledger, config, store=store)
            )
    return batches
