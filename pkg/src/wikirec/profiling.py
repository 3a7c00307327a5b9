"""Per-editor features shared by every recommender.

All operations are pure functions of (corpus, as_of): experience tier,
revert-based quality score, category interest vector, per-project recent
in-scope activity, and the weighted member-interaction graph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from enum import Enum

from .corpus import Corpus

DEFAULT_BRAND_NEW_MAX_EDITS = 50
DEFAULT_BRAND_NEW_RECENCY_DAYS = 30
DEFAULT_HIGHLY_EXPERIENCED_MIN_EDITS = 3000
DEFAULT_QUALITY_EVIDENCE_MIN = 10


class ExperienceTier(str, Enum):
    BRAND_NEW = "brand_new"
    MODERATELY_EXPERIENCED = "moderately_experienced"
    HIGHLY_EXPERIENCED = "highly_experienced"


class UnknownEditorError(KeyError):
    pass


class UnknownProjectError(KeyError):
    pass


@dataclass(frozen=True)
class EditorProfile:
    editor_id: str
    tier: ExperienceTier
    total_edits: int
    revert_rate: float
    quality: float
    category_vector: dict[str, int]
    recent_in_scope_edits: dict[str, int]


def _require_editor(corpus: Corpus, editor_id: str) -> None:
    if editor_id not in corpus.editors:
        raise UnknownEditorError(editor_id)


def _require_project(corpus: Corpus, project_id: str) -> None:
    if project_id not in corpus.projects:
        raise UnknownProjectError(project_id)


def tier_of(
    editor_id: str,
    corpus: Corpus,
    as_of: datetime,
    *,
    brand_new_max_edits: int = DEFAULT_BRAND_NEW_MAX_EDITS,
    brand_new_recency_days: int = DEFAULT_BRAND_NEW_RECENCY_DAYS,
    highly_experienced_min_edits: int = DEFAULT_HIGHLY_EXPERIENCED_MIN_EDITS,
) -> ExperienceTier:
    """Classify an editor at ``as_of``.

    A large edit count wins over registration recency, so a prolific
    editor registered days ago still counts as highly experienced.
    """
    _require_editor(corpus, editor_id)
    total = sum(
        1 for e in corpus.edits if e.editor_id == editor_id and e.timestamp < as_of
    )
    if total > highly_experienced_min_edits:
        return ExperienceTier.HIGHLY_EXPERIENCED
    recent = as_of - corpus.editors[editor_id] <= timedelta(days=brand_new_recency_days)
    if total < brand_new_max_edits or recent:
        return ExperienceTier.BRAND_NEW
    return ExperienceTier.MODERATELY_EXPERIENCED


def quality_score(
    editor_id: str,
    corpus: Corpus,
    as_of: datetime,
    *,
    evidence_min: int = DEFAULT_QUALITY_EVIDENCE_MIN,
) -> float:
    """Revert rate over all edits before ``as_of``.

    Editors below the evidence floor score 0.0 so thin history never
    disqualifies a newcomer.
    """
    _require_editor(corpus, editor_id)
    total = 0
    reverted = 0
    for e in corpus.edits:
        if e.editor_id == editor_id and e.timestamp < as_of:
            total += 1
            reverted += e.reverted
    if total < evidence_min:
        return 0.0
    return reverted / total


def category_vector(editor_id: str, corpus: Corpus, as_of: datetime) -> dict[str, int]:
    """Category -> count of the editor's edits (before ``as_of``) to articles carrying it."""
    _require_editor(corpus, editor_id)
    vec: dict[str, int] = {}
    for e in corpus.edits:
        if e.editor_id != editor_id or e.timestamp >= as_of:
            continue
        for cat in corpus.articles[e.article_id].categories:
            vec[cat] = vec.get(cat, 0) + 1
    return vec


def project_category_profile(project_id: str, corpus: Corpus) -> dict[str, int]:
    """Category -> count of the project's in-scope articles carrying it."""
    _require_project(corpus, project_id)
    profile: dict[str, int] = {}
    for article in corpus.articles.values():
        if project_id in article.in_scope_of:
            for cat in article.categories:
                profile[cat] = profile.get(cat, 0) + 1
    return profile


def in_scope_edit_count(
    editor_id: str,
    project_id: str,
    corpus: Corpus,
    as_of: datetime,
    window_days: int,
) -> int:
    """Edits by the editor to the project's in-scope articles in the trailing window.

    The window is [as_of - window_days, as_of): the lower edge is included,
    the as_of instant itself is not.
    """
    _require_editor(corpus, editor_id)
    _require_project(corpus, project_id)
    start = as_of - timedelta(days=window_days)
    count = 0
    for e in corpus.edits:
        if e.editor_id != editor_id or not (start <= e.timestamp < as_of):
            continue
        if project_id in corpus.articles[e.article_id].in_scope_of:
            count += 1
    return count


class InteractionGraph:
    """Weighted undirected editor graph; weight(a, b) = ln(1 + interaction count)."""

    def __init__(self, pair_counts: dict[tuple[str, str], int]):
        self._weights = {pair: math.log1p(n) for pair, n in pair_counts.items() if n > 0}

    @staticmethod
    def _key(a: str, b: str) -> tuple[str, str]:
        return (a, b) if a <= b else (b, a)

    def weight(self, a: str, b: str) -> float:
        if a == b:
            return 0.0
        return self._weights.get(self._key(a, b), 0.0)

    def edges(self):
        return self._weights.items()

    def __len__(self) -> int:
        return len(self._weights)


def build_interaction_graph(
    corpus: Corpus, as_of: datetime, window_days: int
) -> InteractionGraph:
    """Pairwise interaction counts in [as_of - window_days, as_of), either direction."""
    if window_days < 1:
        raise ValueError(f"window_days must be >= 1, got {window_days}")
    start = as_of - timedelta(days=window_days)
    counts: dict[tuple[str, str], int] = {}
    for i in corpus.interactions:
        if start <= i.timestamp < as_of:
            key = InteractionGraph._key(i.source, i.target)
            counts[key] = counts.get(key, 0) + 1
    return InteractionGraph(counts)


def editor_profile(
    editor_id: str,
    corpus: Corpus,
    as_of: datetime,
    *,
    rule_window_days: int = 30,
    brand_new_max_edits: int = DEFAULT_BRAND_NEW_MAX_EDITS,
    brand_new_recency_days: int = DEFAULT_BRAND_NEW_RECENCY_DAYS,
    highly_experienced_min_edits: int = DEFAULT_HIGHLY_EXPERIENCED_MIN_EDITS,
    quality_evidence_min: int = DEFAULT_QUALITY_EVIDENCE_MIN,
) -> EditorProfile:
    """Aggregate view used by the review surface."""
    _require_editor(corpus, editor_id)
    total = 0
    reverted = 0
    vec: dict[str, int] = {}
    start = as_of - timedelta(days=rule_window_days)
    recent: dict[str, int] = {}
    for e in corpus.edits:
        if e.editor_id != editor_id or e.timestamp >= as_of:
            continue
        total += 1
        reverted += e.reverted
        article = corpus.articles[e.article_id]
        for cat in article.categories:
            vec[cat] = vec.get(cat, 0) + 1
        if e.timestamp >= start:
            for pid in article.in_scope_of:
                recent[pid] = recent.get(pid, 0) + 1
    rate = reverted / total if total else 0.0
    quality = rate if total >= quality_evidence_min else 0.0
    if total > highly_experienced_min_edits:
        tier = ExperienceTier.HIGHLY_EXPERIENCED
    elif total < brand_new_max_edits or (
        as_of - corpus.editors[editor_id] <= timedelta(days=brand_new_recency_days)
    ):
        tier = ExperienceTier.BRAND_NEW
    else:
        tier = ExperienceTier.MODERATELY_EXPERIENCED
    return EditorProfile(editor_id, tier, total, rate, quality, vec, recent)
