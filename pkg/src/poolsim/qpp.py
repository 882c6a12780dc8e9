"""Post-retrieval query performance prediction.

The single estimator implemented here scores a (query, system) pair by the
standard deviation of its top-k retrieval scores, normalized by the query's
similarity to the whole collection. The collection similarity is the mean
idf of the query terms; a mean-absolute-score proxy is available for setups
without term statistics. Other post-retrieval estimators can be dropped in
anywhere a raw-estimate producer is expected, since downstream code only
consumes :class:`QppEstimate` values.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .trec import QuerySet, SystemRun, TermStatistics

log = logging.getLogger(__name__)

UNSEEN_TERM_DF = 0.5
DEFAULT_EPSILON = 1e-9


class DenominatorMode(Enum):
    """How the collection-similarity denominator is obtained."""

    IDF_MEAN = "idf"
    MEAN_ABS_SCORE = "mean-abs"


class NormalizationScope(Enum):
    """Grouping used by max-normalization."""

    PER_SYSTEM = "per-system"
    GLOBAL = "global"


@dataclass(frozen=True)
class QppConfig:
    """Cutoff and denominator settings for the estimator."""

    k: int
    denominator_mode: DenominatorMode = DenominatorMode.IDF_MEAN
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")


@dataclass(frozen=True)
class QppEstimate:
    """Raw and (once normalized) [0,1] estimate for one (query, system) pair."""

    query_id: str
    system_tag: str
    raw: float
    normalized: float | None = None


def collection_score(query_terms: Sequence[str], stats: TermStatistics) -> float:
    """Mean idf of the query terms: (1/|Q|) * sum ln(N / df(t)).

    Terms absent from the statistics contribute ln(N / 0.5), penalizing
    unseen terms maximally among seen ones without producing infinite idf.
    """
    if not query_terms:
        raise ValueError("collection_score requires at least one query term")
    n = stats.doc_count
    total = math.fsum(
        math.log(n / stats.doc_freq.get(term, UNSEEN_TERM_DF)) for term in query_terms
    )
    return total / len(query_terms)


def mean_abs_score(scores: Sequence[float], k: int) -> float:
    """Mean absolute value of the top-k scores (denominator fallback)."""
    top = list(scores[: min(k, len(scores))])
    if not top:
        return 0.0
    return math.fsum(abs(s) for s in top) / len(top)


def nqc(
    scores: Sequence[float], k: int, p_q_c: float, epsilon: float = DEFAULT_EPSILON
) -> float:
    """Standard deviation of the top-k scores over the collection score.

    Uses the population variance (divide by the window length). Windows of
    length <= 1 have no spread and score 0; an empty score list is a
    degenerate query and also scores 0, with a warning.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    top = list(scores[: min(k, len(scores))])
    if not top:
        log.warning("nqc called with an empty score list; returning 0")
        return 0.0
    if len(top) == 1:
        return 0.0
    mean = math.fsum(top) / len(top)
    variance = math.fsum((s - mean) ** 2 for s in top) / len(top)
    return math.sqrt(variance) / max(p_q_c, epsilon)


def estimate_runs(
    runs: Iterable[SystemRun],
    config: QppConfig,
    queries: QuerySet | None = None,
    term_stats: TermStatistics | None = None,
) -> list[QppEstimate]:
    """Raw estimates for every (query, system) pair present in the runs.

    With ``IDF_MEAN`` the denominator is the mean idf of the query's terms;
    queries missing from the query set (or when no query set / statistics
    were supplied at all) fall back to the mean absolute top-k score, with a
    warning per affected query. Queries whose ranked list is shorter than k
    use all available documents.
    """
    estimates: list[QppEstimate] = []
    for run in runs:
        for query_id in sorted(run.rankings):
            scores = run.scores(query_id)
            use_idf = (
                config.denominator_mode is DenominatorMode.IDF_MEAN
                and queries is not None
                and term_stats is not None
                and query_id in queries
            )
            if use_idf:
                denominator = collection_score(queries.terms(query_id), term_stats)
            else:
                if config.denominator_mode is DenominatorMode.IDF_MEAN:
                    log.warning(
                        "query %s, run %s: no query terms or term statistics; "
                        "falling back to mean absolute score denominator",
                        query_id,
                        run.system_tag,
                    )
                denominator = mean_abs_score(scores, config.k)
            if len(scores) < config.k:
                log.warning(
                    "query %s, run %s: only %d documents for a k=%d estimation window",
                    query_id,
                    run.system_tag,
                    len(scores),
                    config.k,
                )
            raw = nqc(scores, config.k, denominator, config.epsilon)
            estimates.append(QppEstimate(query_id, run.system_tag, raw))
    return estimates


def max_normalize(
    estimates: Sequence[QppEstimate],
    scope: NormalizationScope = NormalizationScope.PER_SYSTEM,
) -> list[QppEstimate]:
    """Divide each raw value by the maximum of its scope group.

    Groups are one per system tag (``PER_SYSTEM``) or a single group over
    everything (``GLOBAL``). A group whose maximum is 0 normalizes to all
    zeros. Output order matches input order.
    """
    for est in estimates:
        if est.raw < 0:
            raise ValueError(
                f"raw estimate for ({est.query_id!r}, {est.system_tag!r}) is negative"
            )

    def group_key(est: QppEstimate) -> str:
        return est.system_tag if scope is NormalizationScope.PER_SYSTEM else ""

    group_max: dict[str, float] = {}
    for est in estimates:
        key = group_key(est)
        group_max[key] = max(group_max.get(key, 0.0), est.raw)

    normalized = []
    for est in estimates:
        gmax = group_max[group_key(est)]
        value = est.raw / gmax if gmax > 0 else 0.0
        normalized.append(dataclasses.replace(est, normalized=value))
    return normalized


def normalized_by_pair(estimates: Iterable[QppEstimate]) -> dict[tuple[str, str], float]:
    """Index normalized estimates as {(query_id, system_tag): value}."""
    out: dict[tuple[str, str], float] = {}
    for est in estimates:
        if est.normalized is None:
            raise ValueError(
                f"estimate for ({est.query_id!r}, {est.system_tag!r}) has not "
                "been normalized"
            )
        out[(est.query_id, est.system_tag)] = est.normalized
    return out


def estimates_to_csv(estimates: Iterable[QppEstimate]) -> str:
    """Debug dump: one ``query_id,system_tag,raw,normalized`` row per estimate."""
    lines = ["query_id,system_tag,raw,normalized"]
    ordered = sorted(estimates, key=lambda e: (e.system_tag, e.query_id))
    for est in ordered:
        norm = "" if est.normalized is None else repr(est.normalized)
        lines.append(f"{est.query_id},{est.system_tag},{est.raw!r},{norm}")
    return "\n".join(lines) + "\n"
