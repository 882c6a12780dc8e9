"""Pooling-strategy simulation over TREC-format retrieval runs.

This package contains:
- Parsers/writers for TREC runs, qrels, query files and term statistics
- A post-retrieval query performance predictor (score-variance based)
- Constant- and variable-depth pool construction
- Retrieval-effectiveness and pool-quality metrics (MAP, coverage,
  average pool size, PNC, Pearson r, Kendall tau)
- A simulation driver that scores every depth policy against the full
  judgments and reports system-rank agreement
- A seeded synthetic dataset generator
"""

from .errors import ParseError, PoolsimError, ValidationError
from .trec import (
    JudgmentSet,
    QuerySet,
    RankedDoc,
    SystemRun,
    TermStatistics,
    parse_qrels,
    parse_queries,
    parse_run,
    parse_term_stats,
    tokenize,
    write_qrels,
)
from .qpp import (
    DenominatorMode,
    NormalizationScope,
    QppConfig,
    QppEstimate,
    collection_score,
    estimate_runs,
    estimates_to_csv,
    max_normalize,
    mean_abs_score,
    normalized_by_pair,
    nqc,
)
from .pooling import (
    CdpFixed,
    DepthPolicy,
    Pool,
    VdpInverseLinear,
    VdpLinear,
    build_pool,
    depth_inverse_linear,
    depth_linear,
    policy_name,
    write_pool_docs,
    write_pool_depths,
)
from .metrics import (
    PoolQuality,
    SystemScoreVector,
    average_precision,
    avg_pool_size,
    coverage,
    kendall_tau,
    mean_average_precision,
    pearson_r,
    pnc,
    pool_quality,
)
from .experiment import (
    ExperimentConfig,
    ExperimentReport,
    PolicyResult,
    cdp_avg_depth,
    default_policies,
    format_report_csv,
    format_report_json,
    format_report_table,
    induce_qrels,
    run_simulation,
)
from .synthetic import SyntheticDataset, SyntheticSpec, generate, write_dataset

__all__ = [
    # errors
    "ParseError",
    "PoolsimError",
    "ValidationError",
    # domain types
    "JudgmentSet",
    "QuerySet",
    "RankedDoc",
    "SystemRun",
    "TermStatistics",
    # parsing / serialization
    "parse_qrels",
    "parse_queries",
    "parse_run",
    "parse_term_stats",
    "tokenize",
    "write_qrels",
    # query performance prediction
    "DenominatorMode",
    "NormalizationScope",
    "QppConfig",
    "QppEstimate",
    "collection_score",
    "estimate_runs",
    "estimates_to_csv",
    "max_normalize",
    "mean_abs_score",
    "normalized_by_pair",
    "nqc",
    # pooling
    "CdpFixed",
    "DepthPolicy",
    "Pool",
    "VdpInverseLinear",
    "VdpLinear",
    "build_pool",
    "depth_inverse_linear",
    "depth_linear",
    "policy_name",
    "write_pool_docs",
    "write_pool_depths",
    # metrics
    "PoolQuality",
    "SystemScoreVector",
    "average_precision",
    "avg_pool_size",
    "coverage",
    "kendall_tau",
    "mean_average_precision",
    "pearson_r",
    "pnc",
    "pool_quality",
    # experiment
    "ExperimentConfig",
    "ExperimentReport",
    "PolicyResult",
    "cdp_avg_depth",
    "default_policies",
    "format_report_csv",
    "format_report_json",
    "format_report_table",
    "induce_qrels",
    "run_simulation",
    # synthetic data
    "SyntheticDataset",
    "SyntheticSpec",
    "generate",
    "write_dataset",
]

__version__ = "0.1.0"
