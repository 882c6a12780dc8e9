"""Effectiveness and pool-quality measures.

Average precision follows trec_eval conventions: a configurable grade
threshold decides relevance, unjudged documents count as non-relevant, and
queries without relevant judgments are skipped when averaging. Pool quality
combines coverage (fraction of all known relevant documents captured,
micro-averaged) with the average per-query pool size; their ratio after a
natural log of the pool size rewards coverage obtained cheaply.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from .errors import ValidationError
from .pooling import Pool
from .trec import JudgmentSet, SystemRun

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SystemScoreVector:
    """Per-system MAP values, in a fixed system order."""

    entries: tuple[tuple[str, float], ...]
    judgment_provenance: str

    def __post_init__(self):
        tags = [tag for tag, _ in self.entries]
        if len(set(tags)) != len(tags):
            raise ValidationError(f"duplicate system tags: {tags}")
        for tag, value in self.entries:
            if not 0.0 <= value <= 1.0:
                raise ValidationError(f"MAP for {tag!r} outside [0, 1]: {value}")

    def values(self) -> list[float]:
        return [value for _, value in self.entries]

    def tags(self) -> list[str]:
        return [tag for tag, _ in self.entries]


@dataclass(frozen=True)
class PoolQuality:
    """Coverage, average pool size and their log-normalized ratio."""

    coverage: float
    avg_pool_size: float
    pnc: float


def average_precision(
    ranking: Sequence[str],
    judgments: JudgmentSet,
    query_id: str,
    rel_threshold: int = 1,
) -> float:
    """AP of one ranking: mean precision at the ranks of relevant documents.

    R (the normalizer) is the number of judged documents for the query with
    grade >= rel_threshold, whether retrieved or not. Returns 0 when R = 0;
    such queries are excluded from MAP averaging.
    """
    if rel_threshold < 1:
        raise ValueError(f"rel_threshold must be >= 1, got {rel_threshold}")
    judged = judgments.judged(query_id)
    total_relevant = sum(1 for g in judged.values() if g >= rel_threshold)
    if total_relevant == 0:
        return 0.0
    hits = 0
    precision_sum = 0.0
    for position, doc_id in enumerate(ranking, start=1):
        if judged.get(doc_id, 0) >= rel_threshold:
            hits += 1
            precision_sum += hits / position
    return precision_sum / total_relevant


def mean_average_precision(
    run: SystemRun, judgments: JudgmentSet, rel_threshold: int = 1
) -> float:
    """Mean AP over the judged queries that have at least one relevant document.

    Queries with no relevant judgments are skipped (not averaged as zero);
    if every query is skipped there is nothing to evaluate and an error is
    raised.
    """
    eligible = [
        query_id
        for query_id in sorted(judgments.queries())
        if judgments.relevant_count(rel_threshold, query_id) >= 1
    ]
    if not eligible:
        raise ValidationError("no query has a relevant document at this threshold")
    total = math.fsum(
        average_precision(run.doc_ids(query_id), judgments, query_id, rel_threshold)
        for query_id in eligible
    )
    return total / len(eligible)


def coverage(pool: Pool, full_judgments: JudgmentSet, rel_threshold: int = 1) -> float:
    """Fraction of all known relevant documents captured by the pool.

    A single global ratio: pooled-relevant count over the total relevant
    count across every query in the full judgments (not a per-query mean).
    """
    total_relevant = full_judgments.relevant_count(rel_threshold)
    if total_relevant == 0:
        raise ValidationError("full judgments contain no relevant documents")
    captured = 0
    for query_id, doc_ids in pool.docs.items():
        judged = full_judgments.judged(query_id)
        captured += sum(1 for d in doc_ids if judged.get(d, 0) >= rel_threshold)
    return captured / total_relevant


def avg_pool_size(pool: Pool) -> float:
    """Mean number of unique pooled documents per query (empty pools count 0)."""
    if not pool.docs:
        raise ValidationError("pool covers no queries")
    sizes = [len(d) for d in pool.docs.values()]
    mean = sum(sizes) / len(sizes)
    if mean == 0:
        log.warning("all per-query pools are empty")
    return mean


def pnc(coverage_value: float, avg_pool_size_value: float) -> float:
    """Coverage divided by the natural log of the average pool size."""
    if avg_pool_size_value <= 1.0:
        raise ValidationError(
            f"average pool size must exceed 1 for PNC, got {avg_pool_size_value}"
        )
    return coverage_value / math.log(avg_pool_size_value)


def pool_quality(
    pool: Pool, full_judgments: JudgmentSet, rel_threshold: int = 1
) -> PoolQuality:
    """Coverage, average pool size and PNC of one pool, computed coherently."""
    cov = coverage(pool, full_judgments, rel_threshold)
    size = avg_pool_size(pool)
    return PoolQuality(cov, size, pnc(cov, size))


def _as_vectors(x: Sequence[float], y: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.ndim != 1 or ya.ndim != 1 or len(xa) != len(ya):
        raise ValueError("inputs must be 1-d vectors of equal length")
    if len(xa) < 2:
        raise ValueError("correlation needs at least 2 observations")
    return xa, ya


def pearson_r(x: Sequence[float], y: Sequence[float]) -> float:
    """Product-moment correlation; errors on constant input (undefined)."""
    xa, ya = _as_vectors(x, y)
    if np.all(xa == xa[0]) or np.all(ya == ya[0]):
        raise ValueError("pearson_r is undefined for a constant vector")
    # Self-correlation must be exactly 1 (reference-consistency contract);
    # the normalized dot product can drift by an ulp.
    if np.array_equal(xa, ya):
        return 1.0
    r = stats.pearsonr(xa, ya).statistic
    return float(min(1.0, max(-1.0, r)))


def kendall_tau(x: Sequence[float], y: Sequence[float]) -> float:
    """Tie-corrected rank correlation (the tau-b variant)."""
    xa, ya = _as_vectors(x, y)
    if np.all(xa == xa[0]) or np.all(ya == ya[0]):
        raise ValueError("kendall_tau is undefined for an all-tied vector")
    # Same reference-consistency contract as pearson_r: tau(x, x) is 1 even
    # when ties make sqrt-based tie correction drift below 1.
    if np.array_equal(xa, ya):
        return 1.0
    tau = stats.kendalltau(xa, ya, variant="b").statistic
    if math.isnan(tau):
        raise ValueError("kendall_tau is undefined for this input")
    return float(min(1.0, max(-1.0, tau)))
