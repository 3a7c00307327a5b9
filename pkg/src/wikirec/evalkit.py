"""Organizer feedback capture and the evaluation measures built on it.

Covers acceptance measures (invitation rate, ratings, Welch two-sample
comparisons with t-distribution p-values) and the impact measure: a
matched-baseline difference-in-differences on within-project edit counts
around each invitation, plus the outside-project change for invited
editors.

The p-value path is self-contained (regularized incomplete beta via a
continued fraction) so tests can check it against an external statistics
library without circularity.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .config import PipelineConfig
from .corpus import Corpus, dump_line, epoch_seconds, format_utc, parse_utc
from .indexes import index_for
from .profiling import ExperienceTier
from .recommenders import Algorithm

_SECONDS_PER_DAY = 86400

FEEDBACK_FILE = "feedback.jsonl"


class FeedbackError(ValueError):
    pass


class DuplicateDecisionError(FeedbackError):
    pass


class InsufficientDataError(ValueError):
    pass


class ImpactWindowError(ValueError):
    pass


@dataclass(frozen=True)
class FeedbackRecord:
    batch_id: str
    project_id: str
    editor_id: str
    algorithm: Algorithm
    pool: ExperienceTier
    invited: bool
    rating: int | None
    decided_at: datetime

    def __post_init__(self) -> None:
        if self.rating is not None and self.rating not in (1, 2, 3, 4, 5):
            raise FeedbackError(f"rating must be 1..5, got {self.rating!r}")

    def to_json(self) -> dict:
        return {
            "batch_id": self.batch_id,
            "project_id": self.project_id,
            "editor_id": self.editor_id,
            "algorithm": self.algorithm.value,
            "pool": self.pool.value,
            "invited": self.invited,
            "rating": self.rating,
            "decided_at": format_utc(self.decided_at),
        }

    @staticmethod
    def from_json(obj: dict) -> "FeedbackRecord":
        return FeedbackRecord(
            batch_id=obj["batch_id"],
            project_id=obj["project_id"],
            editor_id=obj["editor_id"],
            algorithm=Algorithm(obj["algorithm"]),
            pool=ExperienceTier(obj["pool"]),
            invited=bool(obj["invited"]),
            rating=obj["rating"],
            decided_at=parse_utc(obj["decided_at"]),
        )


def decision_key(record: FeedbackRecord) -> tuple[str, str, str]:
    return (record.batch_id, record.editor_id, record.algorithm.value)


class FeedbackLog:
    """Append-only decision log, optionally mirrored to a jsonl file."""

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self.records: list[FeedbackRecord] = []
        self._keys: set[tuple[str, str, str]] = set()
        if self.path is not None and self.path.exists():
            with self.path.open(encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        self._absorb(FeedbackRecord.from_json(json.loads(line)))

    def _absorb(self, record: FeedbackRecord) -> None:
        key = decision_key(record)
        if key in self._keys:
            raise DuplicateDecisionError(
                f"decision already recorded for batch={key[0]} editor={key[1]} algorithm={key[2]}"
            )
        self.records.append(record)
        self._keys.add(key)

    def has(self, record: FeedbackRecord) -> bool:
        return decision_key(record) in self._keys

    def append(self, record: FeedbackRecord) -> None:
        if decision_key(record) in self._keys:
            raise DuplicateDecisionError(
                f"decision already recorded for batch={record.batch_id} "
                f"editor={record.editor_id} algorithm={record.algorithm.value}"
            )
        if self.path is not None:
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(dump_line(record.to_json()) + "\n")
        self._absorb(record)

    def __len__(self) -> int:
        return len(self.records)


def invitation_rate(feedback: Sequence[FeedbackRecord], algorithm: Algorithm) -> float:
    decided = [r for r in feedback if r.algorithm is algorithm]
    if not decided:
        raise InsufficientDataError(f"no decisions for {algorithm.value}")
    return sum(r.invited for r in decided) / len(decided)


def mean_rating(feedback: Sequence[FeedbackRecord], algorithm: Algorithm) -> tuple[float, int]:
    ratings = [r.rating for r in feedback if r.algorithm is algorithm and r.rating is not None]
    if not ratings:
        raise InsufficientDataError(f"no rated decisions for {algorithm.value}")
    return sum(ratings) / len(ratings), len(ratings)


def _betacf(a: float, b: float, x: float) -> float:
    # continued fraction for the incomplete beta (modified Lentz)
    max_iter = 300
    eps = 3e-16
    fpmin = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < fpmin:
        d = fpmin
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            break
    return h


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_two_sided_p(t: float, df: float) -> float:
    if df <= 0:
        raise ValueError(f"df must be positive, got {df}")
    if t == 0.0:
        return 1.0
    x = df / (df + t * t)
    return regularized_incomplete_beta(df / 2.0, 0.5, x)


def welch_t(sample_a: Sequence[float], sample_b: Sequence[float]) -> tuple[float, float, float]:
    """(t, df, two-sided p) for unequal-variance two-sample comparison."""
    na, nb = len(sample_a), len(sample_b)
    if na < 2 or nb < 2:
        raise InsufficientDataError(f"need >= 2 observations per sample, got {na} and {nb}")
    ma = sum(sample_a) / na
    mb = sum(sample_b) / nb
    va = sum((v - ma) ** 2 for v in sample_a) / (na - 1)
    vb = sum((v - mb) ** 2 for v in sample_b) / (nb - 1)
    if va == 0.0 and vb == 0.0:
        raise InsufficientDataError("zero variance in both samples")
    se2 = va / na + vb / nb
    t = (ma - mb) / math.sqrt(se2)
    df = se2 * se2 / ((va / na) ** 2 / (na - 1) + (vb / nb) ** 2 / (nb - 1))
    return t, df, student_t_two_sided_p(t, df)


def compare_ratings(
    feedback: Sequence[FeedbackRecord],
    algorithm_a: Algorithm,
    pooled_others: Iterable[Algorithm],
) -> tuple[float, float, float]:
    """Welch comparison of one algorithm's ratings against the others pooled."""
    others = set(pooled_others)
    sample_a = [
        float(r.rating) for r in feedback
        if r.algorithm is algorithm_a and r.rating is not None
    ]
    sample_b = [
        float(r.rating) for r in feedback
        if r.algorithm in others and r.rating is not None
    ]
    # canonical accumulation order: result must not depend on decision order
    sample_a.sort()
    sample_b.sort()
    return welch_t(sample_a, sample_b)


def tier_balance(feedback: Sequence[FeedbackRecord]) -> dict[str, dict]:
    """Decision and invitation counts split by pool; every pool must appear."""
    pools = (ExperienceTier.BRAND_NEW, ExperienceTier.MODERATELY_EXPERIENCED)
    out = {}
    for pool in pools:
        decided = [r for r in feedback if r.pool is pool]
        if not decided:
            raise InsufficientDataError(f"no decisions for pool {pool.value}")
        invited = sum(r.invited for r in decided)
        out[pool.value] = {
            "decisions": len(decided),
            "invited": invited,
            "invitation_rate": invited / len(decided),
        }
    return out


def build_metrics_report(feedback: Sequence[FeedbackRecord]) -> dict:
    """JSON-ready report: per-algorithm rates/ratings, pooled comparisons, tier split."""
    algorithms = {}
    for algorithm in Algorithm:
        decided = [r for r in feedback if r.algorithm is algorithm]
        section: dict = {"decisions": len(decided)}
        if decided:
            invited = sum(r.invited for r in decided)
            section["invited"] = invited
            section["invitation_rate"] = invited / len(decided)
            ratings = [r.rating for r in decided if r.rating is not None]
            section["rating_count"] = len(ratings)
            if ratings:
                section["mean_rating"] = sum(ratings) / len(ratings)
        algorithms[algorithm.value] = section

    comparisons = {}
    for algorithm in Algorithm:
        others = [a for a in Algorithm if a is not algorithm]
        try:
            t, df, p = compare_ratings(feedback, algorithm, others)
            comparisons[f"{algorithm.value}_vs_rest"] = {"t": t, "df": df, "p": p}
        except InsufficientDataError as exc:
            comparisons[f"{algorithm.value}_vs_rest"] = {"skipped": str(exc)}

    tiers = {}
    for pool in (ExperienceTier.BRAND_NEW, ExperienceTier.MODERATELY_EXPERIENCED):
        decided = [r for r in feedback if r.pool is pool]
        if decided:
            invited = sum(r.invited for r in decided)
            tiers[pool.value] = {
                "decisions": len(decided),
                "invited": invited,
                "invitation_rate": invited / len(decided),
            }

    return {
        "algorithms": algorithms,
        "comparisons": comparisons,
        "tiers": tiers,
        "method": "welch unequal-variance t; two-sided p from the t distribution",
    }


def metrics_text(report: dict) -> str:
    lines = ["algorithm            decisions  invited  rate     ratings  mean"]
    for name, sec in sorted(report["algorithms"].items()):
        if sec["decisions"] == 0:
            lines.append(f"{name:<20} {0:>9}  {'-':>7}  {'-':>6}  {'-':>7}  -")
            continue
        rate = f"{sec['invitation_rate']:.3f}"
        mean = f"{sec['mean_rating']:.3f}" if "mean_rating" in sec else "-"
        lines.append(
            f"{name:<20} {sec['decisions']:>9}  {sec['invited']:>7}  {rate:>6}  "
            f"{sec['rating_count']:>7}  {mean}"
        )
    for name, cmp_ in sorted(report["comparisons"].items()):
        if "t" in cmp_:
            lines.append(f"{name}: t={cmp_['t']:.3f} df={cmp_['df']:.1f} p={cmp_['p']:.4g}")
        else:
            lines.append(f"{name}: skipped ({cmp_['skipped']})")
    for pool, sec in sorted(report.get("tiers", {}).items()):
        lines.append(
            f"pool {pool}: {sec['invited']}/{sec['decisions']} invited "
            f"(rate {sec['invitation_rate']:.3f})"
        )
    return "\n".join(lines)


@dataclass(frozen=True)
class ImpactReport:
    window_days: int
    n_treated: int
    invited_pre_mean: float
    invited_post_mean: float
    baseline_pre_mean: float
    baseline_post_mean: float
    estimate: float
    outside_change_mean: float
    matches: list[dict] = field(default_factory=list)
    skipped: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "window_days": self.window_days,
            "n_treated": self.n_treated,
            "invited_pre_mean": self.invited_pre_mean,
            "invited_post_mean": self.invited_post_mean,
            "baseline_pre_mean": self.baseline_pre_mean,
            "baseline_post_mean": self.baseline_post_mean,
            "estimate": self.estimate,
            "outside_change_mean": self.outside_change_mean,
            "matches": self.matches,
            "skipped": self.skipped,
        }


def _project_scope_mask(index, project_idx: int) -> np.ndarray:
    mask = np.zeros(index.n_articles, dtype=bool)
    positions = np.flatnonzero(index.art_scope_indices == project_idx)
    if positions.size:
        articles = np.searchsorted(index.art_scope_indptr, positions, side="right") - 1
        mask[articles] = True
    return mask


def _tiers_at(index, t0: int, config: PipelineConfig) -> tuple[np.ndarray, np.ndarray]:
    n = int(np.searchsorted(index.edit_ts, t0, side="left"))
    totals = np.bincount(index.edit_editor[:n], minlength=index.n_editors).astype(np.int64)
    recent = (t0 - index.registered) <= config.brand_new_recency_days * _SECONDS_PER_DAY
    tiers = np.full(index.n_editors, 1, dtype=np.int8)
    tiers[(totals < config.brand_new_max_edits) | recent] = 0
    tiers[totals > config.highly_experienced_min_edits] = 2
    return tiers, totals


def impact_analysis(
    feedback: Sequence[FeedbackRecord],
    corpus: Corpus,
    window_days: int,
    join_signal: set[tuple[str, str]] | None = None,
    *,
    config: PipelineConfig | None = None,
) -> ImpactReport:
    """Matched-baseline difference-in-differences around each invitation.

    Treated = invited editors (restricted to join_signal pairs when given).
    Each is matched, with replacement, to an editor of the same tier at the
    decision instant who was never invited to that project: nearest
    pre-window in-scope edit count, ties by nearest lifetime edit count,
    then editor_id. Pre window is [t0 - w, t0), post is (t0, t0 + w].
    """
    if window_days < 1:
        raise ValueError(f"window_days must be >= 1, got {window_days}")
    config = config or PipelineConfig()
    treated = [
        r for r in feedback
        if r.invited and (join_signal is None or (r.project_id, r.editor_id) in join_signal)
    ]
    if not treated:
        raise InsufficientDataError("no invited editors in feedback")
    index = index_for(corpus)
    w = window_days * _SECONDS_PER_DAY
    corpus_end = epoch_seconds(corpus.as_of)

    invited_by_project: dict[str, set[str]] = {}
    for r in feedback:
        if r.invited:
            invited_by_project.setdefault(r.project_id, set()).add(r.editor_id)

    scope_masks: dict[int, np.ndarray] = {}
    window_cache: dict[tuple[int, int], tuple] = {}
    tier_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    rows = []
    matches: list[dict] = []
    skipped: list[dict] = []
    outside_changes = []
    for r in treated:
        if r.editor_id not in index.editor_pos:
            raise FeedbackError(f"feedback references unknown editor {r.editor_id}")
        if r.project_id not in index.project_pos:
            raise FeedbackError(f"feedback references unknown project {r.project_id}")
        t0 = epoch_seconds(r.decided_at)
        if t0 + w > corpus_end:
            raise ImpactWindowError(
                f"post window for {r.editor_id} ends {format_utc(r.decided_at)}+{window_days}d, "
                f"beyond corpus coverage {format_utc(corpus.as_of)}"
            )
        p = index.project_pos[r.project_id]
        e = index.editor_pos[r.editor_id]

        if p not in scope_masks:
            scope_masks[p] = _project_scope_mask(index, p)
        scoped = scope_masks[p]

        ckey = (p, t0)
        if ckey not in window_cache:
            pre_lo = int(np.searchsorted(index.edit_ts, t0 - w, side="left"))
            pre_hi = int(np.searchsorted(index.edit_ts, t0, side="left"))
            post_lo = int(np.searchsorted(index.edit_ts, t0, side="right"))
            post_hi = int(np.searchsorted(index.edit_ts, t0 + w, side="right"))
            n_ed = index.n_editors
            pre_ed = index.edit_editor[pre_lo:pre_hi]
            pre_in_mask = scoped[index.edit_article[pre_lo:pre_hi]]
            post_ed = index.edit_editor[post_lo:post_hi]
            post_in_mask = scoped[index.edit_article[post_lo:post_hi]]
            window_cache[ckey] = (
                np.bincount(pre_ed[pre_in_mask], minlength=n_ed),
                np.bincount(post_ed[post_in_mask], minlength=n_ed),
                np.bincount(pre_ed, minlength=n_ed),
                np.bincount(post_ed, minlength=n_ed),
            )
        pre_in, post_in, pre_all, post_all = window_cache[ckey]

        if t0 not in tier_cache:
            tier_cache[t0] = _tiers_at(index, t0, config)
        tiers, totals = tier_cache[t0]

        excluded = invited_by_project.get(r.project_id, set())
        mask = (tiers == tiers[e]) & (index.registered <= t0)
        mask[e] = False
        for editor_id in excluded:
            pos = index.editor_pos.get(editor_id)
            if pos is not None:
                mask[pos] = False
        cand = np.flatnonzero(mask)
        if cand.size == 0:
            skipped.append({
                "project_id": r.project_id,
                "editor_id": r.editor_id,
                "reason": "no baseline candidate of matching tier",
            })
            continue
        pre_diff = np.abs(pre_in[cand] - pre_in[e])
        tot_diff = np.abs(totals[cand] - totals[e])
        best = cand[np.lexsort((cand, tot_diff, pre_diff))[0]]

        rows.append((
            float(pre_in[e]), float(post_in[e]), float(pre_in[best]), float(post_in[best])
        ))
        outside_changes.append(
            float(post_all[e] - post_in[e]) - float(pre_all[e] - pre_in[e])
        )
        matches.append({
            "project_id": r.project_id,
            "editor_id": r.editor_id,
            "baseline_editor_id": index.editor_ids[best],
            "pre": int(pre_in[e]),
            "post": int(post_in[e]),
            "baseline_pre": int(pre_in[best]),
            "baseline_post": int(post_in[best]),
        })

    if not rows:
        raise InsufficientDataError("every invited editor was skipped; nothing to estimate")
    arr = np.array(rows, dtype=np.float64)
    deltas = (arr[:, 1] - arr[:, 0]) - (arr[:, 3] - arr[:, 2])
    return ImpactReport(
        window_days=window_days,
        n_treated=arr.shape[0],
        invited_pre_mean=float(arr[:, 0].mean()),
        invited_post_mean=float(arr[:, 1].mean()),
        baseline_pre_mean=float(arr[:, 2].mean()),
        baseline_post_mean=float(arr[:, 3].mean()),
        estimate=float(deltas.mean()),
        outside_change_mean=float(np.mean(outside_changes)),
        matches=matches,
        skipped=skipped,
    )
