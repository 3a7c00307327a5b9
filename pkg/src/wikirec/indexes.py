"""Array-backed corpus views for batch scoring.

CorpusIndex turns a corpus into sorted-id integer indexes and time-sorted
event arrays, built once per corpus. Snapshot derives everything an
as_of-bound scoring pass needs (tiers, quality, edit-count CSRs, windowed
tie weights) and is cached so the eight cells of one batch share a single
build.

Index positions follow sorted id order, so ascending index equals
ascending editor_id; ranking tie-breaks rely on this.
"""

from __future__ import annotations

import weakref
from datetime import datetime

import numpy as np

from . import _kernels
from .config import PipelineConfig
from .corpus import Corpus, epoch_seconds

_SECONDS_PER_DAY = 86400


def _csr_from_pairs(rows: np.ndarray, cols: np.ndarray, n_rows: int, n_cols: int,
                    weights: np.ndarray | None = None):
    """Aggregate duplicate (row, col) pairs into CSR arrays sorted by (row, col)."""
    key = rows.astype(np.int64) * n_cols + cols.astype(np.int64)
    uniq, inverse = np.unique(key, return_inverse=True)
    if weights is None:
        data = np.bincount(inverse, minlength=uniq.size).astype(np.float64)
    else:
        data = np.bincount(inverse, weights=weights, minlength=uniq.size)
    out_rows = (uniq // n_cols).astype(np.int64)
    out_cols = (uniq % n_cols).astype(np.int64)
    indptr = np.zeros(n_rows + 1, dtype=np.int64)
    np.cumsum(np.bincount(out_rows, minlength=n_rows), out=indptr[1:])
    return indptr, out_cols, data


def _row_norms(rows: np.ndarray, data: np.ndarray, n_rows: int) -> np.ndarray:
    return np.sqrt(np.bincount(rows, weights=data * data, minlength=n_rows))


def _expand_ranges(starts: np.ndarray, degrees: np.ndarray) -> np.ndarray:
    """Concatenate ranges [starts[i], starts[i] + degrees[i]) into one index array."""
    total = int(degrees.sum())
    if total == 0:
        return np.zeros(0, dtype=np.int64)
    shift = np.repeat(starts - np.concatenate(([0], np.cumsum(degrees)[:-1])), degrees)
    return np.arange(total, dtype=np.int64) + shift


class CorpusIndex:
    def __init__(self, corpus: Corpus):
        self.corpus = corpus
        self.editor_ids = sorted(corpus.editors)
        self.article_ids = sorted(corpus.articles)
        self.project_ids = sorted(corpus.projects)
        self.editor_pos = {e: i for i, e in enumerate(self.editor_ids)}
        self.article_pos = {a: i for i, a in enumerate(self.article_ids)}
        self.project_pos = {p: i for i, p in enumerate(self.project_ids)}
        self.n_editors = len(self.editor_ids)
        self.n_articles = len(self.article_ids)
        self.n_projects = len(self.project_ids)

        cats = set()
        for article in corpus.articles.values():
            cats.update(article.categories)
        self.category_ids = sorted(cats)
        self.category_pos = {c: i for i, c in enumerate(self.category_ids)}
        self.n_categories = len(self.category_ids)

        self.registered = np.array(
            [epoch_seconds(corpus.editors[e]) for e in self.editor_ids], dtype=np.int64
        )

        # article -> categories and article -> scoping projects, CSR over article idx
        cat_rows, cat_cols, scope_rows, scope_cols = [], [], [], []
        for a_idx, a_id in enumerate(self.article_ids):
            article = corpus.articles[a_id]
            for c in sorted(article.categories):
                cat_rows.append(a_idx)
                cat_cols.append(self.category_pos[c])
            for p in sorted(article.in_scope_of):
                scope_rows.append(a_idx)
                scope_cols.append(self.project_pos[p])
        self.art_cat_indptr = np.zeros(self.n_articles + 1, dtype=np.int64)
        np.cumsum(np.bincount(np.array(cat_rows, dtype=np.int64), minlength=self.n_articles),
                  out=self.art_cat_indptr[1:])
        self.art_cat_indices = np.array(cat_cols, dtype=np.int64)
        self.art_scope_indptr = np.zeros(self.n_articles + 1, dtype=np.int64)
        np.cumsum(np.bincount(np.array(scope_rows, dtype=np.int64), minlength=self.n_articles),
                  out=self.art_scope_indptr[1:])
        self.art_scope_indices = np.array(scope_cols, dtype=np.int64)

        # static project category profiles (all in-scope articles, no time filter)
        self.proj_cat = np.zeros((self.n_projects, max(self.n_categories, 1)), dtype=np.float64)
        for a_idx in range(self.n_articles):
            for j in range(self.art_scope_indptr[a_idx], self.art_scope_indptr[a_idx + 1]):
                p = self.art_scope_indices[j]
                for t in range(self.art_cat_indptr[a_idx], self.art_cat_indptr[a_idx + 1]):
                    self.proj_cat[p, self.art_cat_indices[t]] += 1.0
        self.proj_cat_norms = np.sqrt((self.proj_cat * self.proj_cat).sum(axis=1))

        # project members, CSR over project idx, member positions ascending
        mem_indptr = [0]
        mem_indices: list[int] = []
        for p_id in self.project_ids:
            members = sorted(self.editor_pos[m] for m in corpus.projects[p_id].members)
            mem_indices.extend(members)
            mem_indptr.append(len(mem_indices))
        self.member_indptr = np.array(mem_indptr, dtype=np.int64)
        self.member_indices = np.array(mem_indices, dtype=np.int64)

        # time-sorted edit arrays
        order = sorted(range(len(corpus.edits)), key=lambda i: corpus.edits[i].timestamp)
        self.edit_ts = np.array(
            [epoch_seconds(corpus.edits[i].timestamp) for i in order], dtype=np.int64
        )
        self.edit_editor = np.array(
            [self.editor_pos[corpus.edits[i].editor_id] for i in order], dtype=np.int64
        )
        self.edit_article = np.array(
            [self.article_pos[corpus.edits[i].article_id] for i in order], dtype=np.int64
        )
        self.edit_reverted = np.array(
            [corpus.edits[i].reverted for i in order], dtype=np.float64
        )

        # time-sorted interaction arrays (kind does not affect tie weights)
        iorder = sorted(range(len(corpus.interactions)),
                        key=lambda i: corpus.interactions[i].timestamp)
        self.inter_ts = np.array(
            [epoch_seconds(corpus.interactions[i].timestamp) for i in iorder], dtype=np.int64
        )
        self.inter_src = np.array(
            [self.editor_pos[corpus.interactions[i].source] for i in iorder], dtype=np.int64
        )
        self.inter_tgt = np.array(
            [self.editor_pos[corpus.interactions[i].target] for i in iorder], dtype=np.int64
        )

        self._snapshots: dict[tuple, Snapshot] = {}

    def snapshot(self, as_of: datetime, config: PipelineConfig) -> "Snapshot":
        key = (
            epoch_seconds(as_of),
            config.rule_window_days,
            config.bonds_window_days,
            config.brand_new_max_edits,
            config.brand_new_recency_days,
            config.highly_experienced_min_edits,
            config.quality_evidence_min,
        )
        snap = self._snapshots.get(key)
        if snap is None:
            snap = Snapshot(self, as_of, config)
            if len(self._snapshots) >= 4:
                self._snapshots.pop(next(iter(self._snapshots)))
            self._snapshots[key] = snap
        return snap


TIER_BRAND_NEW = 0
TIER_MODERATE = 1
TIER_HIGH = 2


class Snapshot:
    """Everything scoring needs at one as_of, computed from events strictly before it."""

    def __init__(self, index: CorpusIndex, as_of: datetime, config: PipelineConfig):
        self.index = index
        self.as_of = as_of
        self.config = config
        ts = epoch_seconds(as_of)
        n = int(np.searchsorted(index.edit_ts, ts, side="left"))
        editors = index.edit_editor[:n]
        articles = index.edit_article[:n]

        self.total_edits = np.bincount(editors, minlength=index.n_editors).astype(np.int64)
        reverted = np.bincount(editors, weights=index.edit_reverted[:n],
                               minlength=index.n_editors)
        with np.errstate(invalid="ignore", divide="ignore"):
            rate = np.where(self.total_edits > 0, reverted / np.maximum(self.total_edits, 1), 0.0)
        self.quality = np.where(
            self.total_edits >= config.quality_evidence_min, rate, 0.0
        )

        self.visible = index.registered <= ts
        age_days_ok = (ts - index.registered) <= config.brand_new_recency_days * _SECONDS_PER_DAY
        tiers = np.full(index.n_editors, TIER_MODERATE, dtype=np.int8)
        tiers[(self.total_edits < config.brand_new_max_edits) | age_days_ok] = TIER_BRAND_NEW
        tiers[self.total_edits > config.highly_experienced_min_edits] = TIER_HIGH
        self.tiers = tiers

        # rule window in-scope counts
        lo = int(np.searchsorted(index.edit_ts,
                                 ts - config.rule_window_days * _SECONDS_PER_DAY, side="left"))
        self.rule_counts = _kernels.scope_window_counts(
            index.edit_editor[lo:n], index.edit_article[lo:n],
            index.art_scope_indptr, index.art_scope_indices,
            index.n_editors, index.n_projects,
        )

        # editor -> article edit-count CSR and inverted article -> editor postings
        self.ea_indptr, self.ea_articles, self.ea_counts = _csr_from_pairs(
            editors, articles, index.n_editors, index.n_articles
        )
        ea_rows = np.repeat(np.arange(index.n_editors, dtype=np.int64),
                            np.diff(self.ea_indptr))
        self.ea_norms = _row_norms(ea_rows, self.ea_counts, index.n_editors)
        self.art_indptr, self.art_editors, self.art_counts = _csr_from_pairs(
            articles, editors, index.n_articles, index.n_editors
        )

        # editor -> category counts via the article CSR expanded by article categories
        deg = index.art_cat_indptr[self.ea_articles + 1] - index.art_cat_indptr[self.ea_articles]
        cat_rows = np.repeat(ea_rows, deg)
        cat_cols = index.art_cat_indices[
            _expand_ranges(index.art_cat_indptr[self.ea_articles], deg)
        ]
        cat_weights = np.repeat(self.ea_counts, deg)
        self.ec_indptr, self.ec_cats, self.ec_counts = _csr_from_pairs(
            cat_rows, cat_cols, index.n_editors, max(index.n_categories, 1),
            weights=cat_weights,
        )
        ec_rows = np.repeat(np.arange(index.n_editors, dtype=np.int64),
                            np.diff(self.ec_indptr))
        self.ec_norms = _row_norms(ec_rows, self.ec_counts, index.n_editors)

        # windowed social ties as canonical (a < b) pairs with log1p weights
        blo = int(np.searchsorted(index.inter_ts,
                                  ts - config.bonds_window_days * _SECONDS_PER_DAY, side="left"))
        bhi = int(np.searchsorted(index.inter_ts, ts, side="left"))
        src = index.inter_src[blo:bhi]
        tgt = index.inter_tgt[blo:bhi]
        keep = src != tgt
        a = np.minimum(src[keep], tgt[keep])
        b = np.maximum(src[keep], tgt[keep])
        key = a * index.n_editors + b
        uniq, counts = np.unique(key, return_counts=True)
        self.pair_a = (uniq // index.n_editors).astype(np.int64)
        self.pair_b = (uniq % index.n_editors).astype(np.int64)
        self.pair_w = np.log1p(counts.astype(np.float64))

        self._category_scores: np.ndarray | None = None
        self._bonds_scores: np.ndarray | None = None
        self._coedit_cols: dict[int, np.ndarray] = {}
        self._pair_b_order: np.ndarray | None = None

    def category_scores(self) -> np.ndarray:
        """Cosine(editor category vector, project profile), (n_editors, n_projects)."""
        if self._category_scores is None:
            index = self.index
            dots = _kernels.csr_dense_dot(
                self.ec_indptr, self.ec_cats, self.ec_counts, index.proj_cat
            )
            denom = self.ec_norms[:, None] * index.proj_cat_norms[None, :]
            with np.errstate(invalid="ignore", divide="ignore"):
                scores = np.where(denom > 0, dots / np.maximum(denom, 1e-300), 0.0)
            self._category_scores = scores
        return self._category_scores

    def bonds_scores(self) -> np.ndarray:
        """Summed tie weight to project members, (n_editors, n_projects)."""
        if self._bonds_scores is None:
            index = self.index
            self._bonds_scores = _kernels.bonds_accumulate(
                self.pair_a, self.pair_b, self.pair_w,
                index.member_indptr, index.member_indices,
                index.n_editors, index.n_projects,
            )
        return self._bonds_scores

    def coedit_scores(self, project_idx: int, top_k: int) -> np.ndarray:
        """Mean of top-k cosines to member edit vectors, one column (n_editors,)."""
        cached = self._coedit_cols.get(project_idx)
        if cached is not None:
            return cached
        index = self.index
        members = index.member_indices[
            index.member_indptr[project_idx]:index.member_indptr[project_idx + 1]
        ]
        n_members = members.size
        if n_members == 0:
            col = np.zeros(index.n_editors, dtype=np.float64)
            self._coedit_cols[project_idx] = col
            return col
        starts = self.ea_indptr[members]
        degrees = self.ea_indptr[members + 1] - starts
        take = _expand_ranges(starts, degrees)
        mem_indptr = np.zeros(n_members + 1, dtype=np.int64)
        np.cumsum(degrees, out=mem_indptr[1:])
        dots = _kernels.member_dots(
            self.art_indptr, self.art_editors, self.art_counts,
            mem_indptr, self.ea_articles[take], self.ea_counts[take],
            index.n_editors,
        )
        denom = self.ea_norms[:, None] * self.ea_norms[members][None, :]
        with np.errstate(invalid="ignore", divide="ignore"):
            cos = np.where(denom > 0, dots / np.maximum(denom, 1e-300), 0.0)
        k = min(top_k, n_members)
        if k == n_members:
            col = cos.mean(axis=1)
        else:
            col = np.partition(cos, n_members - k, axis=1)[:, n_members - k:].mean(axis=1)
        self._coedit_cols[project_idx] = col
        return col

    def tie_neighbors(self, editor_idx: int) -> tuple[np.ndarray, np.ndarray]:
        """Editors tied to this one in the window, with their log1p weights."""
        # pairs are stored canonically (a < b) sorted by (a, b); a second
        # ordering by b makes both directions sliceable
        if self._pair_b_order is None:
            self._pair_b_order = np.argsort(self.pair_b, kind="stable")
        lo = np.searchsorted(self.pair_a, editor_idx, side="left")
        hi = np.searchsorted(self.pair_a, editor_idx, side="right")
        b_sorted = self.pair_b[self._pair_b_order]
        blo = np.searchsorted(b_sorted, editor_idx, side="left")
        bhi = np.searchsorted(b_sorted, editor_idx, side="right")
        rev = self._pair_b_order[blo:bhi]
        neighbors = np.concatenate((self.pair_b[lo:hi], self.pair_a[rev]))
        weights = np.concatenate((self.pair_w[lo:hi], self.pair_w[rev]))
        return neighbors, weights

    def member_mask(self, project_idx: int) -> np.ndarray:
        index = self.index
        mask = np.zeros(index.n_editors, dtype=bool)
        mask[index.member_indices[
            index.member_indptr[project_idx]:index.member_indptr[project_idx + 1]
        ]] = True
        return mask


_INDEX_CACHE: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def index_for(corpus: Corpus) -> CorpusIndex:
    """Return the cached CorpusIndex for this corpus object, building it on first use."""
    idx = _INDEX_CACHE.get(corpus)
    if idx is None:
        idx = CorpusIndex(corpus)
        _INDEX_CACHE[corpus] = idx
    return idx
