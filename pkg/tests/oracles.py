"""Independent brute-force reference implementations used only by tests.

Everything here works directly off Corpus objects with dicts and loops,
deliberately sharing no code with the production scoring path. Counting
is grouped by editor for speed but still applies each definition
literally.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from datetime import timedelta


def edits_by_editor(corpus, as_of):
    """editor_id -> list of that editor's edits strictly before as_of."""
    grouped = defaultdict(list)
    for e in corpus.edits:
        if e.timestamp < as_of:
            grouped[e.editor_id].append(e)
    return grouped


def oracle_tier(corpus, editor_id, as_of, *, brand_new_max_edits=50,
                brand_new_recency_days=30, highly_experienced_min_edits=3000):
    total = sum(1 for e in corpus.edits if e.editor_id == editor_id and e.timestamp < as_of)
    if total > highly_experienced_min_edits:
        return "highly_experienced"
    age = as_of - corpus.editors[editor_id]
    if total < brand_new_max_edits or age <= timedelta(days=brand_new_recency_days):
        return "brand_new"
    return "moderately_experienced"


def oracle_quality(corpus, editor_id, as_of, *, evidence_min=10):
    mine = [e for e in corpus.edits if e.editor_id == editor_id and e.timestamp < as_of]
    if len(mine) < evidence_min:
        return 0.0
    return sum(1 for e in mine if e.reverted) / len(mine)


def oracle_rule_scores(corpus, as_of, *, window_days=30, min_edits=5):
    """(editor_id, project_id) -> rule score for every pair (0 below the floor)."""
    start = as_of - timedelta(days=window_days)
    counts = Counter()
    for e in corpus.edits:
        if start <= e.timestamp < as_of:
            for pid in corpus.articles[e.article_id].in_scope_of:
                counts[(e.editor_id, pid)] += 1
    out = {}
    for editor_id in corpus.editors:
        for project_id in corpus.projects:
            c = counts.get((editor_id, project_id), 0)
            out[(editor_id, project_id)] = c if c >= min_edits else 0
    return out


def _cosine(vec_a: dict, vec_b: dict) -> float:
    if not vec_a or not vec_b:
        return 0.0
    dot = sum(v * vec_b.get(k, 0) for k, v in vec_a.items())
    na = math.sqrt(sum(v * v for v in vec_a.values()))
    nb = math.sqrt(sum(v * v for v in vec_b.values()))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return dot / (na * nb)


def oracle_category_vectors(corpus, as_of):
    vectors = defaultdict(Counter)
    for e in corpus.edits:
        if e.timestamp < as_of:
            for cat in corpus.articles[e.article_id].categories:
                vectors[e.editor_id][cat] += 1
    return vectors


def oracle_project_profiles(corpus):
    profiles = defaultdict(Counter)
    for article in corpus.articles.values():
        for pid in article.in_scope_of:
            for cat in article.categories:
                profiles[pid][cat] += 1
    return profiles


def oracle_category_scores(corpus, as_of):
    vectors = oracle_category_vectors(corpus, as_of)
    profiles = oracle_project_profiles(corpus)
    out = {}
    for editor_id in corpus.editors:
        vec = vectors.get(editor_id, {})
        for project_id in corpus.projects:
            out[(editor_id, project_id)] = _cosine(vec, profiles.get(project_id, {}))
    return out


def oracle_pair_weights(corpus, as_of, *, window_days):
    start = as_of - timedelta(days=window_days)
    counts = Counter()
    for i in corpus.interactions:
        if start <= i.timestamp < as_of and i.source != i.target:
            counts[tuple(sorted((i.source, i.target)))] += 1
    return {pair: math.log1p(n) for pair, n in counts.items()}


def oracle_bonds_scores(corpus, as_of, *, window_days=90):
    weights = oracle_pair_weights(corpus, as_of, window_days=window_days)
    out = {}
    for editor_id in corpus.editors:
        for project_id, project in corpus.projects.items():
            total = 0.0
            for member in project.members:
                if member == editor_id:
                    continue
                total += weights.get(tuple(sorted((editor_id, member))), 0.0)
            out[(editor_id, project_id)] = total
    return out


def oracle_edit_vectors(corpus, as_of):
    vectors = defaultdict(Counter)
    for e in corpus.edits:
        if e.timestamp < as_of:
            vectors[e.editor_id][e.article_id] += 1
    return vectors


def oracle_coedit_scores(corpus, as_of, *, top_k=5):
    vectors = oracle_edit_vectors(corpus, as_of)
    out = {}
    for project_id, project in corpus.projects.items():
        members = sorted(project.members)
        for editor_id in corpus.editors:
            if not members:
                out[(editor_id, project_id)] = 0.0
                continue
            sims = sorted(
                (_cosine(vectors.get(editor_id, {}), vectors.get(m, {})) for m in members),
                reverse=True,
            )
            k = min(top_k, len(members))
            out[(editor_id, project_id)] = sum(sims[:k]) / k
    return out


def oracle_eligible(corpus, editor_id, project_id, as_of, *, quality_cutoff=0.5,
                    evidence_min=10, **tier_kwargs):
    if corpus.editors[editor_id] > as_of:
        return False
    if editor_id in corpus.projects[project_id].members:
        return False
    if oracle_tier(corpus, editor_id, as_of, **tier_kwargs) == "highly_experienced":
        return False
    return oracle_quality(corpus, editor_id, as_of, evidence_min=evidence_min) < quality_cutoff


def oracle_rank(corpus, project_id, pool_name, scores, as_of, n, *, quality_cutoff=0.5,
                evidence_min=10, exclude=frozenset(), **tier_kwargs):
    """Full-sort ranking from a (editor, project) -> score mapping."""
    rows = []
    for editor_id in corpus.editors:
        if editor_id in exclude:
            continue
        score = scores[(editor_id, project_id)]
        if score <= 0:
            continue
        if not oracle_eligible(corpus, editor_id, project_id, as_of,
                               quality_cutoff=quality_cutoff,
                               evidence_min=evidence_min, **tier_kwargs):
            continue
        if oracle_tier(corpus, editor_id, as_of, **tier_kwargs) != pool_name:
            continue
        rows.append((editor_id, score))
    rows.sort(key=lambda r: (-r[1], r[0]))
    return rows[:n]


def assert_rankings_equivalent(impl, reference, tol=1e-9):
    """Compare ranked (id, score) lists, tolerating swaps among near-ties."""
    assert len(impl) == len(reference), (impl, reference)
    for (got_id, got_score), (want_id, want_score) in zip(impl, reference):
        assert abs(got_score - want_score) <= tol, (impl, reference)
    # same candidates overall, position-by-position up to tie wiggle
    impl_ids = [i for i, _ in impl]
    ref_ids = [i for i, _ in reference]
    if impl_ids == ref_ids:
        return
    assert sorted(impl_ids) == sorted(ref_ids), (impl, reference)
    pos_ref = {eid: i for i, (eid, _) in enumerate(reference)}
    for i, (eid, score) in enumerate(impl):
        j = pos_ref[eid]
        if i != j:
            assert abs(reference[i][1] - reference[j][1]) <= tol, (impl, reference)
