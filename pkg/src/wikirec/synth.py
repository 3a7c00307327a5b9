"""Deterministic synthetic corpus generator for desk-scale testing.

Editors get a skewed favorite-project interest (Zipf over projects) and an
affinity level that concentrates their edits on that project's articles, so
category and co-edit signal exists. A veteran slice registered long before
the activity window provides the experienced tiers and project membership.
All draws come from one seeded generator, so a fixed seed reproduces the
corpus byte for byte.
"""

from __future__ import annotations

from datetime import datetime, timedelta, timezone

import numpy as np

from .corpus import Article, Corpus, EditEvent, Interaction, Project, INTERACTION_KINDS

# Fixed origin keeps generated corpora reproducible across wall-clock time.
ORIGIN = datetime(2022, 1, 3, tzinfo=timezone.utc)

_SECONDS_PER_DAY = 86400


def _utc(seconds: int) -> datetime:
    return datetime.fromtimestamp(int(seconds), tz=timezone.utc)


def generate_synthetic(
    editor_count: int,
    project_count: int,
    category_count: int,
    weeks: int,
    seed: int,
) -> Corpus:
    """Build a corpus with ``editor_count`` editors active over ``weeks`` weeks."""
    for name, value in (
        ("editor_count", editor_count),
        ("project_count", project_count),
        ("category_count", category_count),
        ("weeks", weeks),
    ):
        if value < 1:
            raise ValueError(f"{name} must be >= 1, got {value}")

    rng = np.random.default_rng(seed)
    window_start = int(ORIGIN.timestamp())
    window_seconds = weeks * 7 * _SECONDS_PER_DAY
    as_of_ts = window_start + window_seconds
    as_of = _utc(as_of_ts)

    categories = [f"cat_{i:03d}" for i in range(category_count)]

    # Projects: a primary category plus a couple of secondary ones.
    project_ids = [f"proj_{i:03d}" for i in range(project_count)]
    project_cats: list[np.ndarray] = []
    for i in range(project_count):
        n_extra = int(rng.integers(1, 4))
        extra = rng.integers(0, category_count, size=n_extra)
        cats = np.unique(np.concatenate(([i % category_count], extra)))
        project_cats.append(cats)

    # Articles: most carry a home project; a fringe pool is unscoped.
    scoped_per_project = 10
    n_unscoped = max(4, (project_count * scoped_per_project) // 5)
    n_articles = project_count * scoped_per_project + n_unscoped
    article_ids = [f"art_{i:05d}" for i in range(n_articles)]
    home_project = np.full(n_articles, -1, dtype=np.int64)
    home_project[: project_count * scoped_per_project] = np.repeat(
        np.arange(project_count), scoped_per_project
    )
    second_scope = rng.random(n_articles) < 0.05

    articles: dict[str, Article] = {}
    scoped_articles_by_project: list[list[int]] = [[] for _ in range(project_count)]
    for idx in range(n_articles):
        home = home_project[idx]
        scope: set[str] = set()
        if home >= 0:
            scope.add(project_ids[home])
            scoped_articles_by_project[home].append(idx)
            pool = project_cats[home]
            k = int(rng.integers(1, min(3, len(pool)) + 1))
            cats = rng.choice(pool, size=k, replace=False)
        else:
            k = int(rng.integers(0, 3))
            cats = rng.integers(0, category_count, size=k)
        if second_scope[idx] and project_count > 1 and home >= 0:
            other = int(rng.integers(0, project_count))
            if other != home:
                scope.add(project_ids[other])
                scoped_articles_by_project[other].append(idx)
        articles[article_ids[idx]] = Article(
            article_ids[idx],
            frozenset(categories[c] for c in np.asarray(cats, dtype=np.int64)),
            frozenset(scope),
        )

    # Editors: ~30% veterans registered well before the window, the rest
    # arriving during it. Interests skew toward low-numbered projects.
    editor_ids = [f"ed_{i:05d}" for i in range(editor_count)]
    is_veteran = rng.random(editor_count) < 0.3
    reg_ts = np.where(
        is_veteran,
        window_start
        - rng.integers(60 * _SECONDS_PER_DAY, 1095 * _SECONDS_PER_DAY, size=editor_count),
        window_start + (rng.random(editor_count) * window_seconds * 0.9).astype(np.int64),
    )

    ranks = rng.permutation(editor_count) % project_count
    zipf_w = 1.0 / (1.0 + np.arange(project_count))
    favorite = rng.choice(project_count, size=editor_count, p=zipf_w / zipf_w.sum())
    favorite = np.where(rng.random(editor_count) < 0.5, favorite, ranks)
    affinity = rng.beta(2.0, 2.0, size=editor_count)

    base_edits = np.clip(rng.lognormal(2.0, 1.1, size=editor_count), 1, 6000)
    edit_counts = np.where(is_veteran, base_edits * 8, base_edits).astype(np.int64)
    edit_counts = np.clip(edit_counts, 1, 8000)

    revert_p = rng.beta(1.2, 10.0, size=editor_count)
    sloppy = rng.random(editor_count) < 0.08
    revert_p = np.where(sloppy, rng.beta(6.0, 4.0, size=editor_count), revert_p)

    # Vectorized edit stream: timestamps uniform between (clipped)
    # registration and as_of, articles biased to the favorite project.
    total_edits = int(edit_counts.sum())
    editor_of_edit = np.repeat(np.arange(editor_count), edit_counts)
    lo = np.maximum(reg_ts, window_start)[editor_of_edit]
    ts = (lo + rng.random(total_edits) * (as_of_ts - 1 - lo)).astype(np.int64)

    proj_art_counts = np.array([len(a) for a in scoped_articles_by_project], dtype=np.int64)
    proj_art_offsets = np.concatenate(([0], np.cumsum(proj_art_counts)))
    proj_art_flat = np.concatenate(
        [np.asarray(a, dtype=np.int64) for a in scoped_articles_by_project]
    )
    fav_of_edit = favorite[editor_of_edit]
    in_scope_draw = rng.random(total_edits) < affinity[editor_of_edit]
    rand_article = rng.integers(0, n_articles, size=total_edits)
    fav_counts = proj_art_counts[fav_of_edit]
    fav_pick = proj_art_flat[
        proj_art_offsets[fav_of_edit] + (rng.random(total_edits) * fav_counts).astype(np.int64)
    ]
    article_of_edit = np.where(in_scope_draw & (fav_counts > 0), fav_pick, rand_article)
    reverted = rng.random(total_edits) < revert_p[editor_of_edit]

    order = np.argsort(ts, kind="stable")
    edits = [
        EditEvent(
            editor_ids[editor_of_edit[i]],
            article_ids[article_of_edit[i]],
            _utc(ts[i]),
            bool(reverted[i]),
        )
        for i in order
    ]

    # Members come from the veteran slice (everyone, if there are none),
    # preferring editors whose favorite is the project.
    veteran_idx = np.flatnonzero(is_veteran)
    if veteran_idx.size == 0:
        veteran_idx = np.arange(editor_count)
    projects: dict[str, Project] = {}
    members_by_project: list[np.ndarray] = []
    for p in range(project_count):
        fans = veteran_idx[favorite[veteran_idx] == p]
        want = int(np.clip(rng.poisson(8) + 2, 2, 40))
        take = fans[: min(len(fans), max(1, want // 2))]
        if len(take) < want:
            extra = rng.choice(veteran_idx, size=min(want - len(take), veteran_idx.size), replace=False)
            take = np.unique(np.concatenate([take, extra]))
        member_ids = frozenset(editor_ids[i] for i in take)
        n_org = int(rng.integers(1, min(3, len(take)) + 1))
        organizer_ids = frozenset(editor_ids[i] for i in sorted(take.tolist())[:n_org])
        projects[project_ids[p]] = Project(
            project_ids[p], f"Project {p:03d}", member_ids, organizer_ids
        )
        members_by_project.append(take)

    # Interactions: mostly editor -> member of their favorite project.
    n_inter = editor_count * 2
    src = rng.integers(0, editor_count, size=n_inter)
    toward_fav = rng.random(n_inter) < 0.7
    tgt = rng.integers(0, editor_count, size=n_inter)
    for i in range(n_inter):
        if toward_fav[i]:
            members = members_by_project[favorite[src[i]]]
            if members.size:
                tgt[i] = members[int(rng.integers(0, members.size))]
    # an interaction cannot predate either participant's registration
    inter_lo = np.maximum(window_start, np.maximum(reg_ts[src], reg_ts[tgt]))
    its = (inter_lo + rng.random(n_inter) * (as_of_ts - 1 - inter_lo)).astype(np.int64)
    kinds = rng.integers(0, len(INTERACTION_KINDS), size=n_inter)
    keep = src != tgt
    inter_order = np.argsort(its[keep], kind="stable")
    src_k, tgt_k, its_k, kinds_k = src[keep], tgt[keep], its[keep], kinds[keep]
    interactions = [
        Interaction(
            editor_ids[src_k[i]],
            editor_ids[tgt_k[i]],
            _utc(its_k[i]),
            INTERACTION_KINDS[kinds_k[i]],
        )
        for i in inter_order
    ]

    editors = {editor_ids[i]: _utc(reg_ts[i]) for i in range(editor_count)}
    return Corpus(editors, edits, articles, projects, interactions, as_of)
