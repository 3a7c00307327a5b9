"""HTTP surface for batch review, decision capture, and metrics.

All reads come from the persisted files loaded at startup; every mutation
validates fully before touching disk, appends under a single writer lock,
and therefore either lands completely or not at all.
"""

from __future__ import annotations

import threading
from pathlib import Path

from fastapi import Body, FastAPI, HTTPException, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles

from .config import PipelineConfig, ServiceConfig
from .corpus import CorpusError, CorpusPaths, load_corpus, format_utc, parse_utc
from .evalkit import (
    FEEDBACK_FILE,
    DuplicateDecisionError,
    FeedbackError,
    FeedbackLog,
    FeedbackRecord,
    ImpactWindowError,
    InsufficientDataError,
    build_metrics_report,
    impact_analysis,
)
from .indexes import TIER_BRAND_NEW, TIER_MODERATE, index_for
from .pipeline import (
    BATCHES_FILE,
    LEDGER_FILE,
    BatchStore,
    RecommendationLedger,
    generate_batch,
    split_cell_key,
)
from .profiling import ExperienceTier
from .recommenders import Algorithm

_TIER_NAMES = {
    TIER_BRAND_NEW: ExperienceTier.BRAND_NEW.value,
    TIER_MODERATE: ExperienceTier.MODERATELY_EXPERIENCED.value,
}


def _bad_request(message: str) -> HTTPException:
    return HTTPException(status_code=400, detail=message)


def create_app(
    data_dir: str | Path,
    pipeline_config: PipelineConfig | None = None,
    token: str = "",
    ui_dir: str | Path | None = None,
) -> FastAPI:
    data_dir = Path(data_dir)
    if not data_dir.is_dir():
        raise CorpusError(f"data directory not found: {data_dir}")
    pipeline_config = pipeline_config or PipelineConfig()

    corpus = load_corpus(CorpusPaths.in_dir(data_dir))
    store = BatchStore(data_dir / BATCHES_FILE)
    ledger = RecommendationLedger(data_dir / LEDGER_FILE)
    feedback = FeedbackLog(data_dir / FEEDBACK_FILE)
    write_lock = threading.Lock()

    app = FastAPI(title="wikirec", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def require_token(request: Request) -> None:
        if not token:
            return
        header = request.headers.get("authorization", "")
        if header != f"Bearer {token}":
            raise HTTPException(status_code=401, detail="missing or invalid token")

    @app.get("/projects")
    def list_projects() -> list[dict]:
        out = []
        for project_id in sorted(corpus.projects):
            project = corpus.projects[project_id]
            out.append({
                "project_id": project_id,
                "name": project.name,
                "member_count": len(project.members),
                "organizer_count": len(project.organizers),
            })
        return out

    @app.get("/projects/{project_id}/batches")
    def list_batches(project_id: str) -> list[dict]:
        if project_id not in corpus.projects:
            raise HTTPException(status_code=404, detail=f"unknown project: {project_id}")
        out = []
        for batch in store.for_project(project_id):
            decided = sum(1 for r in feedback.records if r.batch_id == batch.batch_id)
            out.append({
                "batch_id": batch.batch_id,
                "project_id": project_id,
                "as_of": format_utc(batch.as_of),
                "candidate_count": sum(len(c) for c in batch.cells.values()),
                "decided_count": decided,
            })
        return out

    @app.get("/batches/{batch_id}")
    def get_batch(batch_id: str) -> dict:
        batch = store.get(batch_id)
        if batch is None:
            raise HTTPException(status_code=404, detail=f"unknown batch: {batch_id}")
        batch_config = PipelineConfig(**batch.config_snapshot)
        index = index_for(corpus)
        snap = index.snapshot(batch.as_of, batch_config)
        p = index.project_pos[batch.project_id]
        cells = {}
        for key, candidates in sorted(batch.cells.items()):
            entries = []
            for cand in candidates:
                e = index.editor_pos[cand.editor_id]
                entries.append({
                    "editor_id": cand.editor_id,
                    "score": cand.score,
                    "explanation": cand.explanation,
                    "profile": {
                        "tier": _TIER_NAMES.get(int(snap.tiers[e]), "highly_experienced"),
                        "recent_in_scope_edits": int(snap.rule_counts[e, p]),
                        "quality": float(snap.quality[e]),
                        "total_edits": int(snap.total_edits[e]),
                    },
                })
            cells[key] = entries
        decisions = [
            r.to_json() for r in feedback.records if r.batch_id == batch_id
        ]
        return {
            "batch_id": batch.batch_id,
            "project_id": batch.project_id,
            "as_of": format_utc(batch.as_of),
            "cells": cells,
            "config_snapshot": batch.config_snapshot,
            "decisions": decisions,
        }

    def _parse_decision(batch, obj: dict) -> FeedbackRecord:
        if not isinstance(obj, dict):
            raise _bad_request("each decision must be an object")
        for field_name in ("editor_id", "algorithm", "pool", "invited"):
            if field_name not in obj:
                raise _bad_request(f"missing field: {field_name}")
        try:
            algorithm = Algorithm(obj["algorithm"])
        except ValueError:
            raise _bad_request(f"algorithm must be one of "
                               f"{[a.value for a in Algorithm]}, got {obj['algorithm']!r}")
        try:
            pool = ExperienceTier(obj["pool"])
        except ValueError:
            raise _bad_request(f"pool invalid: {obj['pool']!r}")
        if pool is ExperienceTier.HIGHLY_EXPERIENCED:
            raise _bad_request("pool invalid: highly_experienced is never recommended")
        if not isinstance(obj["invited"], bool):
            raise _bad_request("invited must be a boolean")
        rating = obj.get("rating")
        if rating is not None and (not isinstance(rating, int) or rating not in (1, 2, 3, 4, 5)):
            raise _bad_request(f"rating must be an integer 1..5, got {rating!r}")
        editor_id = obj["editor_id"]
        key = f"{algorithm.value}|{pool.value}"
        issued = {c.editor_id for c in batch.cells.get(key, [])}
        if editor_id not in issued:
            raise _bad_request(
                f"no issued recommendation for editor {editor_id} under {key} "
                f"in batch {batch.batch_id}"
            )
        decided_raw = obj.get("decided_at")
        if decided_raw is not None:
            try:
                decided_at = parse_utc(decided_raw)
            except (ValueError, CorpusError) as exc:
                raise _bad_request(f"decided_at invalid: {exc}")
        else:
            decided_at = batch.as_of
        return FeedbackRecord(
            batch_id=batch.batch_id,
            project_id=batch.project_id,
            editor_id=editor_id,
            algorithm=algorithm,
            pool=pool,
            invited=obj["invited"],
            rating=rating,
            decided_at=decided_at,
        )

    @app.post("/batches/{batch_id}/decisions")
    def post_decisions(batch_id: str, request: Request, payload=Body(...)) -> dict:
        require_token(request)
        batch = store.get(batch_id)
        if batch is None:
            raise HTTPException(status_code=404, detail=f"unknown batch: {batch_id}")
        items = payload if isinstance(payload, list) else [payload]
        if not items:
            raise _bad_request("no decisions in payload")
        with write_lock:
            records = []
            try:
                for obj in items:
                    records.append(_parse_decision(batch, obj))
            except FeedbackError as exc:
                raise _bad_request(str(exc))
            seen = set()
            for record in records:
                key = (record.batch_id, record.editor_id, record.algorithm.value)
                if key in seen or feedback.has(record):
                    raise HTTPException(
                        status_code=409,
                        detail=f"decision already recorded for editor {record.editor_id} "
                               f"under {record.algorithm.value} in batch {batch_id}",
                    )
                seen.add(key)
            # everything validated; appends cannot fail the uniqueness check now
            for record in records:
                feedback.append(record)
        return {"recorded": [r.to_json() for r in records]}

    @app.get("/metrics")
    def metrics() -> dict:
        return build_metrics_report(feedback.records)

    @app.get("/impact")
    def impact(window_days: int = Query(default=pipeline_config.impact_window_days, ge=1)) -> dict:
        try:
            report = impact_analysis(
                feedback.records, corpus, window_days, config=pipeline_config
            )
        except (InsufficientDataError, ImpactWindowError, FeedbackError) as exc:
            return {"skipped": str(exc), "window_days": window_days}
        return report.to_json()

    @app.post("/admin/generate")
    def admin_generate(request: Request, as_of: str = Query(...)) -> dict:
        require_token(request)
        try:
            when = parse_utc(as_of)
        except (ValueError, CorpusError) as exc:
            raise _bad_request(f"as_of invalid: {exc}")
        if when > corpus.as_of:
            raise _bad_request(
                f"as_of {format_utc(when)} is beyond corpus coverage "
                f"{format_utc(corpus.as_of)}"
            )
        with write_lock:
            created = []
            for project_id in sorted(corpus.projects):
                batch = generate_batch(
                    project_id, corpus, when, ledger, pipeline_config, store=store
                )
                created.append(batch.batch_id)
        return {"created": created}

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def serve(config: ServiceConfig, pipeline_config: PipelineConfig | None = None,
          ui_dir: str | Path | None = None) -> None:
    import uvicorn

    app = create_app(
        config.data_dir, pipeline_config, token=config.token, ui_dir=ui_dir
    )
    uvicorn.run(app, host="127.0.0.1", port=config.port)
