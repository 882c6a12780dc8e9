"""Seeded synthetic retrieval datasets.

The toolkit never redistributes TREC runs or judgments, so tests and demos
use generated data with the same shape: a directory of runs, graded qrels,
a query file and term statistics. Queries come in two planted classes:

* "easy" queries have many relevant documents and peaked (fast-decaying)
  retrieval scores, so their score spread at the top of the ranking is
  large;
* "hard" queries have few relevant documents and nearly flat scores.

Systems share a consensus ordering per query (agreeing on roughly where the
relevant mass sits) and differ by an independent noise term scaled by a
per-system quality factor, which spreads their MAP values.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .trec import JudgmentSet, QuerySet, SystemRun, TermStatistics

# Ranking model constants. Gains position relevant documents near the top
# of a ~num_docs Gumbel race: rank of a gain-g document is roughly
# num_docs * exp(-g), so easy-query relevant documents spread through the
# first couple hundred ranks while hard-query ones sit in the top handful.
EASY_REL_GAIN = 4.0
HARD_REL_GAIN = 7.5
SHARED_NOISE = 1.0
SYSTEM_NOISE = 0.35
EASY_RELEVANT = (30, 60)
HARD_RELEVANT = (2, 6)
EASY_SCORE_SCALE = 10.0
EASY_SCORE_DECAY = 15.0
HARD_SCORE_BASE = 5.0
HARD_SCORE_SLOPE = 0.001


@dataclass(frozen=True)
class SyntheticSpec:
    """Knobs for one generated dataset."""

    num_systems: int = 20
    num_queries: int = 50
    num_docs: int = 5000
    run_length: int = 100
    easy_fraction: float = 0.5
    vocab_size: int = 200
    terms_per_query: tuple[int, int] = (2, 4)
    judge_pool_depth: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.num_systems < 1 or self.num_queries < 1:
            raise ValueError("need at least one system and one query")
        if self.run_length > self.num_docs:
            raise ValueError("run_length cannot exceed num_docs")
        if not 0.0 <= self.easy_fraction <= 1.0:
            raise ValueError(f"easy_fraction outside [0, 1]: {self.easy_fraction}")


@dataclass(frozen=True)
class SyntheticDataset:
    """Generated runs, judgments, queries and statistics, plus query classes."""

    runs: tuple[SystemRun, ...]
    judgments: JudgmentSet
    queries: QuerySet
    term_stats: TermStatistics
    query_classes: dict[str, str]  # query_id -> "easy" | "hard"


def _doc_id(index: int) -> str:
    return f"d{index:05d}"


def generate(spec: SyntheticSpec) -> SyntheticDataset:
    """Build one dataset; the same spec always yields identical output.

    With ``judge_pool_depth`` set, the judgments cover exactly the union of
    the systems' top-k documents at that depth (every pooled document gets
    a grade, 0 for non-relevant); otherwise all planted relevant documents
    are judged, plus the depth-10 pool as judged non-relevant.
    """
    rng = np.random.default_rng(spec.seed)

    vocab = [f"term{i:03d}" for i in range(spec.vocab_size)]
    df_low = max(1, spec.num_docs // 200)
    df_high = max(df_low + 1, spec.num_docs // 10)
    doc_freq = {
        term: int(df) for term, df in zip(vocab, rng.integers(df_low, df_high, len(vocab)))
    }

    tags = [f"sys{i:02d}" for i in range(spec.num_systems)]
    quality = rng.uniform(0.6, 1.4, spec.num_systems)

    num_easy = round(spec.easy_fraction * spec.num_queries)
    easy_flags = np.zeros(spec.num_queries, dtype=bool)
    easy_flags[:num_easy] = True
    rng.shuffle(easy_flags)

    lo, hi = spec.terms_per_query
    queries: dict[str, tuple[str, ...]] = {}
    query_classes: dict[str, str] = {}
    rankings: dict[str, dict[str, list[tuple[str, float]]]] = {t: {} for t in tags}
    relevant_grades: dict[tuple[str, str], int] = {}
    shallow_pool: dict[str, set[str]] = {}

    for qi in range(spec.num_queries):
        query_id = f"q{qi + 1:03d}"
        easy = bool(easy_flags[qi])
        query_classes[query_id] = "easy" if easy else "hard"
        n_terms = int(rng.integers(lo, hi + 1))
        queries[query_id] = tuple(
            vocab[i] for i in rng.choice(spec.vocab_size, n_terms, replace=False)
        )

        rel_lo, rel_hi = EASY_RELEVANT if easy else HARD_RELEVANT
        n_rel = int(rng.integers(rel_lo, rel_hi + 1))
        rel_docs = rng.choice(spec.num_docs, n_rel, replace=False)
        for doc, grade in zip(rel_docs, rng.choice([1, 2], n_rel, p=[0.6, 0.4])):
            relevant_grades[(query_id, _doc_id(int(doc)))] = int(grade)

        gains = np.zeros(spec.num_docs)
        gains[rel_docs] = EASY_REL_GAIN if easy else HARD_REL_GAIN
        shared = rng.gumbel(0.0, SHARED_NOISE, spec.num_docs)

        shallow_pool[query_id] = set()
        for si, tag in enumerate(tags):
            own = rng.gumbel(0.0, SYSTEM_NOISE, spec.num_docs)
            utility = gains * (0.7 + 0.3 * quality[si]) + shared + own
            top = np.argsort(-utility)[: spec.run_length]

            positions = np.arange(spec.run_length)
            if easy:
                scores = EASY_SCORE_SCALE * np.exp(-positions / EASY_SCORE_DECAY)
                scores += rng.normal(0.0, 0.02, spec.run_length)
            else:
                scores = HARD_SCORE_BASE - HARD_SCORE_SLOPE * positions
                scores += rng.normal(0.0, 0.002, spec.run_length)
            scores = np.sort(scores)[::-1]

            rankings[tag][query_id] = [
                (_doc_id(int(doc)), float(score)) for doc, score in zip(top, scores)
            ]
            shallow_pool[query_id].update(_doc_id(int(d)) for d in top[:10])

    runs = tuple(SystemRun.from_scores(tag, rankings[tag]) for tag in tags)

    grades: dict[tuple[str, str], int] = {}
    if spec.judge_pool_depth is not None:
        k = spec.judge_pool_depth
        for run in runs:
            for query_id in run.rankings:
                for doc_id in run.doc_ids(query_id)[:k]:
                    key = (query_id, doc_id)
                    grades[key] = relevant_grades.get(key, 0)
    else:
        grades.update(relevant_grades)
        for query_id, docs in shallow_pool.items():
            for doc_id in docs:
                grades.setdefault((query_id, doc_id), 0)

    return SyntheticDataset(
        runs=runs,
        judgments=JudgmentSet(grades, provenance="full"),
        queries=QuerySet(queries),
        term_stats=TermStatistics(spec.num_docs, doc_freq),
        query_classes=query_classes,
    )


def write_dataset(dataset: SyntheticDataset, out_dir: str | Path) -> None:
    """Write the dataset in the toolkit's on-disk formats under ``out_dir``.

    Layout: ``runs/<tag>.run`` (TREC run format), ``qrels.txt``,
    ``queries.tsv`` and ``term_stats.txt``. Scores are written with repr
    precision so reparsing reproduces the in-memory dataset exactly.
    """
    out = Path(out_dir)
    runs_dir = out / "runs"
    runs_dir.mkdir(parents=True, exist_ok=True)
    for run in dataset.runs:
        lines = []
        for query_id in sorted(run.rankings):
            for doc in run.rankings[query_id]:
                lines.append(
                    f"{query_id} Q0 {doc.doc_id} {doc.rank} {doc.score!r} {run.system_tag}\n"
                )
        (runs_dir / f"{run.system_tag}.run").write_text("".join(lines))

    from .trec import write_qrels  # local import to keep module load light

    (out / "qrels.txt").write_text(write_qrels(dataset.judgments))
    (out / "queries.tsv").write_text(
        "".join(
            f"{query_id}\t{' '.join(terms)}\n"
            for query_id, terms in sorted(dataset.queries.queries.items())
        )
    )
    stats_lines = [f"N {dataset.term_stats.doc_count}\n"]
    stats_lines += [
        f"{term} {df}\n" for term, df in sorted(dataset.term_stats.doc_freq.items())
    ]
    (out / "term_stats.txt").write_text("".join(stats_lines))
