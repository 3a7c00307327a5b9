"""The four candidate scorers and the per-cell ranking entry point.

Rule-based counts recent edits to in-scope articles (with a minimum-edits
floor below which the candidate is not recommendable by this algorithm).
Category-based takes the cosine between an editor's category interests and
the project's category profile. Bonds-based sums tie weights to current
members. Co-edit-based averages the top-k cosine similarities between the
candidate's and members' article-edit-count vectors.

Scorers answer for any known editor; eligibility (membership, tier,
quality) is enforced where rankings are assembled.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from enum import Enum

import numpy as np

from .config import PipelineConfig
from .corpus import Corpus
from .indexes import TIER_BRAND_NEW, TIER_HIGH, TIER_MODERATE, Snapshot, index_for
from .profiling import (
    ExperienceTier,
    UnknownEditorError,
    UnknownProjectError,
    quality_score,
    tier_of,
)


class Algorithm(str, Enum):
    RULE_BASED = "rule_based"
    CATEGORY_BASED = "category_based"
    BONDS_BASED = "bonds_based"
    COEDIT_BASED = "coedit_based"


_TIER_CODE = {
    ExperienceTier.BRAND_NEW: TIER_BRAND_NEW,
    ExperienceTier.MODERATELY_EXPERIENCED: TIER_MODERATE,
    ExperienceTier.HIGHLY_EXPERIENCED: TIER_HIGH,
}


@dataclass(frozen=True)
class ScoredCandidate:
    editor_id: str
    algorithm: Algorithm
    score: float
    explanation: str


def _positions(corpus: Corpus, editor_id: str, project_id: str) -> tuple[int, int]:
    index = index_for(corpus)
    try:
        e = index.editor_pos[editor_id]
    except KeyError:
        raise UnknownEditorError(editor_id) from None
    try:
        p = index.project_pos[project_id]
    except KeyError:
        raise UnknownProjectError(project_id) from None
    return e, p


def eligible(
    editor_id: str,
    project_id: str,
    corpus: Corpus,
    as_of: datetime,
    config: PipelineConfig,
) -> bool:
    """Recruitable: a non-member, not highly experienced, below the quality cutoff."""
    _positions(corpus, editor_id, project_id)
    if editor_id in corpus.projects[project_id].members:
        return False
    if corpus.editors[editor_id] > as_of:
        return False
    tier = tier_of(
        editor_id,
        corpus,
        as_of,
        brand_new_max_edits=config.brand_new_max_edits,
        brand_new_recency_days=config.brand_new_recency_days,
        highly_experienced_min_edits=config.highly_experienced_min_edits,
    )
    if tier is ExperienceTier.HIGHLY_EXPERIENCED:
        return False
    q = quality_score(editor_id, corpus, as_of, evidence_min=config.quality_evidence_min)
    return q < config.quality_cutoff


def score_rule_based(
    editor_id: str,
    project_id: str,
    corpus: Corpus,
    as_of: datetime,
    window_days: int = 30,
    *,
    min_edits: int = 5,
) -> int:
    """In-scope edit count over the trailing window; below min_edits the score is 0."""
    e, p = _positions(corpus, editor_id, project_id)
    config = PipelineConfig(rule_window_days=window_days)
    snap = index_for(corpus).snapshot(as_of, config)
    count = int(snap.rule_counts[e, p])
    return count if count >= min_edits else 0


def score_category_based(
    editor_id: str,
    project_id: str,
    corpus: Corpus,
    as_of: datetime,
) -> float:
    """Cosine between the editor's category counts and the project's profile."""
    e, p = _positions(corpus, editor_id, project_id)
    snap = index_for(corpus).snapshot(as_of, PipelineConfig())
    return float(snap.category_scores()[e, p])


def score_bonds_based(
    editor_id: str,
    project_id: str,
    corpus: Corpus,
    as_of: datetime,
    config: PipelineConfig,
) -> float:
    """Total tie weight between the editor and current project members."""
    e, p = _positions(corpus, editor_id, project_id)
    snap = index_for(corpus).snapshot(as_of, config)
    return float(snap.bonds_scores()[e, p])


def score_coedit_based(
    editor_id: str,
    project_id: str,
    corpus: Corpus,
    as_of: datetime,
    config: PipelineConfig,
) -> float:
    """Mean of the top-k cosine similarities to member edit vectors."""
    e, p = _positions(corpus, editor_id, project_id)
    snap = index_for(corpus).snapshot(as_of, config)
    return float(snap.coedit_scores(p, config.coedit_top_k)[e])


def _rule_explanation(count: int, window_days: int) -> str:
    return f"{count} edits to in-scope articles in the last {window_days} days"


def _category_explanation(snap: Snapshot, e: int, p: int, score: float) -> str:
    index = snap.index
    shared: list[tuple[float, str]] = []
    for j in range(snap.ec_indptr[e], snap.ec_indptr[e + 1]):
        c = snap.ec_cats[j]
        if index.proj_cat[p, c] > 0:
            shared.append((-snap.ec_counts[j], index.category_ids[c]))
    shared.sort()
    names = ", ".join(name for _, name in shared[:3])
    return f"category overlap {score:.3f}; top shared: {names}"


def _bonds_explanation(snap: Snapshot, e: int, p: int, score: float) -> str:
    index = snap.index
    members = index.member_indices[index.member_indptr[p]:index.member_indptr[p + 1]]
    member_set = set(int(m) for m in members)
    neighbors, _ = snap.tie_neighbors(e)
    connected = sorted(member_set.intersection(int(x) for x in neighbors))
    names = ", ".join(index.editor_ids[m] for m in connected[:3])
    return f"tie strength {score:.3f} across {len(connected)} member(s): {names}"


def _coedit_explanation(score: float, k: int) -> str:
    return f"edit-history similarity {score:.3f} to top {k} closest member(s)"


def rank_candidates(
    project_id: str,
    pool: ExperienceTier,
    algorithm: Algorithm,
    corpus: Corpus,
    as_of: datetime,
    config: PipelineConfig,
    n: int,
    *,
    exclude: set[str] | frozenset[str] = frozenset(),
) -> list[ScoredCandidate]:
    """Top-n eligible editors of one tier with positive scores.

    Sorted by score descending, ties by editor_id ascending. `exclude`
    removes editors before ranking, so history never shortens a cell that
    still has fresh candidates.
    """
    if pool is ExperienceTier.HIGHLY_EXPERIENCED:
        raise ValueError("highly experienced editors are never ranked")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    index = index_for(corpus)
    try:
        p = index.project_pos[project_id]
    except KeyError:
        raise UnknownProjectError(project_id) from None
    snap = index.snapshot(as_of, config)

    if algorithm is Algorithm.RULE_BASED:
        raw = snap.rule_counts[:, p].astype(np.float64)
        raw[raw < config.rule_min_edits] = 0.0
    elif algorithm is Algorithm.CATEGORY_BASED:
        raw = snap.category_scores()[:, p]
    elif algorithm is Algorithm.BONDS_BASED:
        raw = snap.bonds_scores()[:, p]
    else:
        raw = snap.coedit_scores(p, config.coedit_top_k)

    mask = (
        snap.visible
        & (snap.tiers == _TIER_CODE[pool])
        & (snap.quality < config.quality_cutoff)
        & ~snap.member_mask(p)
        & (raw > 0)
    )
    if exclude:
        for editor_id in exclude:
            idx = index.editor_pos.get(editor_id)
            if idx is not None:
                mask[idx] = False

    cand = np.flatnonzero(mask)
    if cand.size == 0:
        return []
    order = np.lexsort((cand, -raw[cand]))[:n]
    chosen = cand[order]

    out = []
    for e in chosen:
        score = float(raw[e])
        if algorithm is Algorithm.RULE_BASED:
            text = _rule_explanation(int(score), config.rule_window_days)
        elif algorithm is Algorithm.CATEGORY_BASED:
            text = _category_explanation(snap, int(e), p, score)
        elif algorithm is Algorithm.BONDS_BASED:
            text = _bonds_explanation(snap, int(e), p, score)
        else:
            k = min(config.coedit_top_k, int(
                index.member_indptr[p + 1] - index.member_indptr[p]
            ))
            text = _coedit_explanation(score, k)
        out.append(ScoredCandidate(index.editor_ids[e], algorithm, score, text))
    return out
