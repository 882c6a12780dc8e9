"""Full simulated-pooling studies.

Given a set of runs and the complete relevance judgments, each configured
depth policy is used to build a pool, the judgments are reduced to that
pool, every system is scored by MAP under both the reduced and the complete
judgments, and the per-policy report row records how well the reduced
ranking of systems agrees with the reference one (Pearson r, Kendall tau)
alongside the pool-quality numbers (coverage, average pool size, PNC).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

from .errors import PoolsimError, ValidationError
from .metrics import (
    SystemScoreVector,
    kendall_tau,
    mean_average_precision,
    pearson_r,
    pool_quality,
)
from .pooling import (
    CdpFixed,
    DepthPolicy,
    Pool,
    VdpInverseLinear,
    VdpLinear,
    build_pool,
    policy_name,
)
from .qpp import (
    NormalizationScope,
    QppConfig,
    estimate_runs,
    max_normalize,
    normalized_by_pair,
)
from .trec import JudgmentSet, QuerySet, SystemRun, TermStatistics

# Fixed methodological choices, surfaced in every report's metadata.
TOOLKIT_DECISIONS = (
    "nqc-variance=population",
    "unseen-term-df=0.5",
    "normalization=max",
    "pnc-log=natural",
    "coverage=micro-average",
    "kendall=tau-b",
    "cdp-avg=round-half-up-midpoint",
    "map=skip-queries-without-relevant",
)


def cdp_avg_depth(d_min: int, d_max: int) -> int:
    """Closest integer to the midpoint of [d_min, d_max], half rounded up."""
    return (d_min + d_max + 1) // 2


def default_policies(d_min: int, d_max: int) -> tuple[DepthPolicy, ...]:
    """The five standard policies: three constant baselines and both VDP kinds."""
    return (
        CdpFixed(d_min, name="CDP-Min"),
        CdpFixed(cdp_avg_depth(d_min, d_max), name="CDP-Avg"),
        CdpFixed(d_max, name="CDP-Max"),
        VdpLinear(d_min, d_max, name="VDP-L"),
        VdpInverseLinear(d_min, d_max, name="VDP-IL"),
    )


@dataclass(frozen=True)
class ExperimentConfig:
    """Depth bounds, relevance threshold and estimator settings for one study."""

    d_min: int
    d_max: int
    rel_threshold: int = 1
    policies: tuple[DepthPolicy, ...] | None = None
    qpp: QppConfig | None = None
    norm_scope: NormalizationScope = NormalizationScope.PER_SYSTEM

    def __post_init__(self):
        if self.d_min < 1:
            raise ValueError(f"d_min must be >= 1, got {self.d_min}")
        if self.d_min > self.d_max:
            raise ValueError(
                f"d_min must not exceed d_max, got [{self.d_min}, {self.d_max}]"
            )
        if self.rel_threshold < 1:
            raise ValueError(f"rel_threshold must be >= 1, got {self.rel_threshold}")

    def resolved_policies(self) -> tuple[DepthPolicy, ...]:
        return self.policies if self.policies is not None else default_policies(
            self.d_min, self.d_max
        )

    def resolved_qpp(self) -> QppConfig:
        return self.qpp if self.qpp is not None else QppConfig(k=self.d_max)


@dataclass(frozen=True)
class PolicyResult:
    """One report row."""

    policy: str
    avg_depth: float
    pearson: float
    kendall: float
    coverage: float
    avg_pool_size: float
    pnc: float


@dataclass(frozen=True)
class ExperimentReport:
    """Report rows in policy order plus run metadata (counts, config echo)."""

    rows: tuple[PolicyResult, ...]
    metadata: dict


def induce_qrels(pool: Pool, full: JudgmentSet) -> JudgmentSet:
    """Restrict the full judgments to the pooled documents.

    Judgments outside the pool are dropped entirely, so downstream AP treats
    those documents as non-relevant.
    """
    if full.provenance != "full":
        raise ValidationError(
            f"expected judgments with provenance 'full', got {full.provenance!r}"
        )
    kept = {
        (query_id, doc_id): grade
        for (query_id, doc_id), grade in full.grades.items()
        if doc_id in pool.docs.get(query_id, frozenset())
    }
    return JudgmentSet(kept, provenance="induced")


def _map_vector(
    runs: Sequence[SystemRun], judgments: JudgmentSet, rel_threshold: int
) -> SystemScoreVector:
    entries = tuple(
        (run.system_tag, mean_average_precision(run, judgments, rel_threshold))
        for run in runs
    )
    return SystemScoreVector(entries, judgments.provenance)


def _skipped_queries(judgments: JudgmentSet, rel_threshold: int) -> int:
    return sum(
        1
        for query_id in judgments.queries()
        if judgments.relevant_count(rel_threshold, query_id) == 0
    )


def run_simulation(
    runs: Sequence[SystemRun],
    full_judgments: JudgmentSet,
    queries: QuerySet | None,
    term_stats: TermStatistics | None,
    config: ExperimentConfig,
) -> ExperimentReport:
    """Execute the whole study and return the per-policy report.

    Estimates are computed once at the configured cutoff (d_max by default)
    and max-normalized in the configured scope; each policy is then built,
    scored and compared against the full-judgment MAP reference. Identical
    inputs produce byte-identical formatted reports.
    """
    if len(runs) < 2:
        raise ValidationError("simulation needs at least 2 runs to correlate")
    ordered_runs = sorted(runs, key=lambda r: r.system_tag)
    tags = [r.system_tag for r in ordered_runs]
    if len(set(tags)) != len(tags):
        raise ValidationError(f"duplicate system tags in run list: {tags}")

    qpp_config = config.resolved_qpp()
    estimates = max_normalize(
        estimate_runs(ordered_runs, qpp_config, queries, term_stats),
        config.norm_scope,
    )
    pair_estimates = normalized_by_pair(estimates)

    query_ids: set[str] = set()
    for run in ordered_runs:
        query_ids |= run.queries()

    full_map = _map_vector(ordered_runs, full_judgments, config.rel_threshold)

    rows: list[PolicyResult] = []
    skipped = {"full": _skipped_queries(full_judgments, config.rel_threshold)}
    short_runs: dict[str, int] = {}
    for policy in config.resolved_policies():
        name = policy_name(policy)
        try:
            pool = build_pool(ordered_runs, policy, pair_estimates, query_ids)
            induced = induce_qrels(pool, full_judgments)
            induced_map = _map_vector(ordered_runs, induced, config.rel_threshold)
            quality = pool_quality(pool, full_judgments, config.rel_threshold)
            rows.append(
                PolicyResult(
                    policy=name,
                    avg_depth=sum(pool.depths.values()) / len(pool.depths),
                    pearson=pearson_r(induced_map.values(), full_map.values()),
                    kendall=kendall_tau(induced_map.values(), full_map.values()),
                    coverage=quality.coverage,
                    avg_pool_size=quality.avg_pool_size,
                    pnc=quality.pnc,
                )
            )
        except PoolsimError as exc:
            raise PoolsimError(f"policy {name}: {exc}") from exc
        except (ValueError, ZeroDivisionError) as exc:
            raise PoolsimError(f"policy {name}: {exc}") from exc
        skipped[name] = _skipped_queries(induced, config.rel_threshold)
        short_runs[name] = len(pool.short_runs)

    metadata = {
        "config": {
            "d_min": config.d_min,
            "d_max": config.d_max,
            "rel_threshold": config.rel_threshold,
            "qpp_k": qpp_config.k,
            "denominator": qpp_config.denominator_mode.value,
            "epsilon": qpp_config.epsilon,
            "norm_scope": config.norm_scope.value,
            "policies": [policy_name(p) for p in config.resolved_policies()],
        },
        "systems": tags,
        "num_queries": len(query_ids),
        "judged_queries": len(full_judgments.queries()),
        "map_skipped_queries": skipped,
        "short_run_pairs": short_runs,
        "decisions": list(TOOLKIT_DECISIONS),
    }
    return ExperimentReport(tuple(rows), metadata)


def format_report_table(report: ExperimentReport) -> str:
    """Aligned plain-text table plus a commented metadata footer."""
    header = ("Pool", "Avg Depth", "P-r", "K-tau", "Coverage", "Avg Pool Size", "PNC")
    body = [
        (
            row.policy,
            f"{row.avg_depth:.2f}",
            f"{row.pearson:.4f}",
            f"{row.kendall:.4f}",
            f"{row.coverage:.4f}",
            f"{row.avg_pool_size:.2f}",
            f"{row.pnc:.4f}",
        )
        for row in report.rows
    ]
    widths = [
        max(len(header[col]), *(len(line[col]) for line in body)) if body else len(header[col])
        for col in range(len(header))
    ]

    def render(cells: tuple[str, ...]) -> str:
        name = cells[0].ljust(widths[0])
        rest = [cells[col].rjust(widths[col]) for col in range(1, len(cells))]
        return "  ".join([name, *rest]).rstrip()

    meta = report.metadata
    cfg = meta["config"]
    skipped = meta["map_skipped_queries"]
    short = meta["short_run_pairs"]
    lines = [render(header)]
    lines += [render(line) for line in body]
    lines += [
        "",
        "# config: "
        + " ".join(f"{key}={cfg[key]}" for key in (
            "d_min", "d_max", "rel_threshold", "qpp_k", "denominator",
            "norm_scope", "epsilon",
        )),
        f"# systems: {len(meta['systems'])}  pooled queries: {meta['num_queries']}  "
        f"judged queries: {meta['judged_queries']}",
        "# map-skipped queries: "
        + " ".join(f"{name}={skipped[name]}" for name in skipped),
        "# short ranked lists: "
        + (" ".join(f"{name}={short[name]}" for name in short) if short else "none"),
        "# decisions: " + " ".join(meta["decisions"]),
    ]
    return "\n".join(lines) + "\n"


def format_report_csv(report: ExperimentReport) -> str:
    """Machine-readable rows with full float precision."""
    lines = ["policy,avg_depth,pearson_r,kendall_tau,coverage,avg_pool_size,pnc"]
    for row in report.rows:
        lines.append(
            f"{row.policy},{row.avg_depth!r},{row.pearson!r},{row.kendall!r},"
            f"{row.coverage!r},{row.avg_pool_size!r},{row.pnc!r}"
        )
    return "\n".join(lines) + "\n"


def format_report_json(report: ExperimentReport) -> str:
    """Structured report: rows plus full metadata."""
    payload = {
        "rows": [
            {
                "policy": row.policy,
                "avg_depth": row.avg_depth,
                "pearson_r": row.pearson,
                "kendall_tau": row.kendall,
                "coverage": row.coverage,
                "avg_pool_size": row.avg_pool_size,
                "pnc": row.pnc,
            }
            for row in report.rows
        ],
        "metadata": report.metadata,
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"
