"""Parsers and writers for the TREC-style text formats the toolkit consumes.

Four inputs are supported:

* run files (``qid Q0 docid rank score tag``, whitespace separated),
* qrels (``qid iter docid grade``),
* query files (``qid<TAB>query text``, UTF-8),
* term-statistics files (``N <doc_count>`` header, then ``term df`` lines).

Runs are canonicalized on parse: within each query, documents are re-sorted
by descending retrieval score with ties broken by ascending doc id, and
ranks are rewritten 1..n. The rank field found in the file is never trusted;
it is only compared against the canonical order to emit a warning.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import ParseError, ValidationError

log = logging.getLogger(__name__)

_TOKEN_SPLIT = re.compile(r"[^0-9a-z]+")


@dataclass(frozen=True)
class RankedDoc:
    """One retrieved document: id, canonical rank (1-based) and score."""

    doc_id: str
    rank: int
    score: float


@dataclass(frozen=True)
class SystemRun:
    """One system's ranked lists, keyed by query id, in canonical order."""

    system_tag: str
    rankings: Mapping[str, tuple[RankedDoc, ...]]

    @classmethod
    def from_scores(
        cls, system_tag: str, scored: Mapping[str, Iterable[tuple[str, float]]]
    ) -> "SystemRun":
        """Build a canonical run from ``{query_id: [(doc_id, score), ...]}``.

        Sorting is by score descending, doc id ascending; ranks are assigned
        1..n after the sort. Duplicate doc ids within a query are rejected.
        """
        rankings: dict[str, tuple[RankedDoc, ...]] = {}
        for query_id, pairs in scored.items():
            pairs = list(pairs)
            seen = set()
            for doc_id, _ in pairs:
                if doc_id in seen:
                    raise ValidationError(
                        f"duplicate document {doc_id!r} for query {query_id!r}"
                    )
                seen.add(doc_id)
            pairs.sort(key=lambda p: (-p[1], p[0]))
            rankings[query_id] = tuple(
                RankedDoc(doc_id, rank, score)
                for rank, (doc_id, score) in enumerate(pairs, start=1)
            )
        return cls(system_tag, rankings)

    def queries(self) -> set[str]:
        return set(self.rankings)

    def doc_ids(self, query_id: str) -> list[str]:
        """Document ids for one query in canonical order ([] if absent)."""
        return [d.doc_id for d in self.rankings.get(query_id, ())]

    def scores(self, query_id: str) -> list[float]:
        """Retrieval scores for one query in canonical order ([] if absent)."""
        return [d.score for d in self.rankings.get(query_id, ())]


class JudgmentSet:
    """Graded relevance judgments: (query_id, doc_id) -> integer grade >= 0."""

    __slots__ = ("grades", "provenance", "_by_query")

    def __init__(self, grades: Mapping[tuple[str, str], int], provenance: str = "full"):
        by_query: dict[str, dict[str, int]] = {}
        for (query_id, doc_id), grade in grades.items():
            if not isinstance(grade, int) or grade < 0:
                raise ValidationError(
                    f"grade for ({query_id!r}, {doc_id!r}) must be a non-negative "
                    f"integer, got {grade!r}"
                )
            by_query.setdefault(query_id, {})[doc_id] = grade
        self.grades = dict(grades)
        self.provenance = provenance
        self._by_query = by_query

    def __eq__(self, other) -> bool:
        if not isinstance(other, JudgmentSet):
            return NotImplemented
        return self.grades == other.grades and self.provenance == other.provenance

    def __len__(self) -> int:
        return len(self.grades)

    def __repr__(self) -> str:
        return f"JudgmentSet({len(self.grades)} judgments, provenance={self.provenance!r})"

    def queries(self) -> set[str]:
        return set(self._by_query)

    def judged(self, query_id: str) -> Mapping[str, int]:
        """doc_id -> grade for one query (empty mapping if unjudged)."""
        return self._by_query.get(query_id, {})

    def grade(self, query_id: str, doc_id: str, default: int = 0) -> int:
        return self._by_query.get(query_id, {}).get(doc_id, default)

    def relevant_count(self, rel_threshold: int, query_id: str | None = None) -> int:
        """Number of judged documents with grade >= threshold.

        Counts one query when ``query_id`` is given, the whole set otherwise
        (the R_max of the coverage denominator).
        """
        if query_id is not None:
            return sum(1 for g in self._by_query.get(query_id, {}).values() if g >= rel_threshold)
        return sum(1 for g in self.grades.values() if g >= rel_threshold)


@dataclass(frozen=True)
class QuerySet:
    """Query id -> lowercase term tokens."""

    queries: Mapping[str, tuple[str, ...]]

    def __contains__(self, query_id: str) -> bool:
        return query_id in self.queries

    def terms(self, query_id: str) -> tuple[str, ...]:
        return self.queries[query_id]


@dataclass(frozen=True)
class TermStatistics:
    """Collection-level statistics: document count and per-term document frequency."""

    doc_count: int
    doc_freq: Mapping[str, int]

    def __post_init__(self):
        if self.doc_count < 1:
            raise ValidationError(f"doc_count must be >= 1, got {self.doc_count}")
        for term, df in self.doc_freq.items():
            if not 1 <= df <= self.doc_count:
                raise ValidationError(
                    f"df({term!r}) = {df} outside [1, {self.doc_count}]"
                )


def tokenize(text: str) -> tuple[str, ...]:
    """Lowercase and split on runs of non-alphanumeric characters."""
    return tuple(t for t in _TOKEN_SPLIT.split(text.lower()) if t)


def parse_run(text: str) -> SystemRun:
    """Parse a TREC run file into a canonicalized :class:`SystemRun`.

    Expects ``qid Q0 docid rank score tag`` per non-blank line. The ``Q0``
    field is ignored; the tag of the first line becomes the system tag. The
    rank field must parse as an integer but is only used for a consistency
    warning against the canonical (score-sorted) order.
    """
    system_tag: str | None = None
    scored: dict[str, list[tuple[str, float]]] = {}
    file_order: dict[str, list[tuple[int, str]]] = {}
    seen: set[tuple[str, str]] = set()

    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        fields = line.split()
        if len(fields) != 6:
            raise ParseError(f"expected 6 fields, got {len(fields)}", line_no)
        query_id, _, doc_id, rank_field, score_field, tag = fields
        try:
            file_rank = int(rank_field)
        except ValueError:
            raise ParseError(f"unparsable rank {rank_field!r}", line_no) from None
        try:
            score = float(score_field)
        except ValueError:
            raise ParseError(f"unparsable score {score_field!r}", line_no) from None
        if not math.isfinite(score):
            raise ParseError(f"non-finite score {score_field!r}", line_no)
        if (query_id, doc_id) in seen:
            raise ValidationError(
                f"duplicate document {doc_id!r} for query {query_id!r}"
            )
        seen.add((query_id, doc_id))
        if system_tag is None:
            system_tag = tag
        scored.setdefault(query_id, []).append((doc_id, score))
        file_order.setdefault(query_id, []).append((file_rank, doc_id))

    if system_tag is None:
        raise ValidationError("run file contains no documents")

    run = SystemRun.from_scores(system_tag, scored)
    for query_id, ranked in file_order.items():
        ranked.sort(key=lambda p: p[0])
        if [d for _, d in ranked] != run.doc_ids(query_id):
            log.warning(
                "run %s: file rank order disagrees with score order for query %s; "
                "scores win",
                system_tag,
                query_id,
            )
            break
    return run


def parse_qrels(text: str) -> JudgmentSet:
    """Parse TREC qrels (``qid iter docid grade``) into a full JudgmentSet.

    Repeated (qid, docid) pairs are tolerated when the grades agree and
    rejected when they conflict. Empty input yields an empty set with a
    warning rather than an error.
    """
    grades: dict[tuple[str, str], int] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        fields = line.split()
        if len(fields) != 4:
            raise ParseError(f"expected 4 fields, got {len(fields)}", line_no)
        query_id, _, doc_id, grade_field = fields
        try:
            grade = int(grade_field)
        except ValueError:
            raise ParseError(f"unparsable grade {grade_field!r}", line_no) from None
        if grade < 0:
            raise ValidationError(
                f"negative grade {grade} for ({query_id!r}, {doc_id!r})"
            )
        key = (query_id, doc_id)
        if key in grades and grades[key] != grade:
            raise ValidationError(
                f"conflicting grades for ({query_id!r}, {doc_id!r}): "
                f"{grades[key]} vs {grade}"
            )
        grades[key] = grade
    if not grades:
        log.warning("qrels input is empty")
    return JudgmentSet(grades, provenance="full")


def parse_queries(text: str) -> QuerySet:
    """Parse ``qid<TAB>query text`` lines into a QuerySet.

    Text is lowercased and split on non-alphanumeric runs; queries that
    tokenize to nothing are rejected, as are duplicate ids.
    """
    queries: dict[str, tuple[str, ...]] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if "\t" not in line:
            raise ParseError("expected '<qid><TAB><text>'", line_no)
        query_id, raw_text = line.split("\t", 1)
        query_id = query_id.strip()
        if not query_id:
            raise ParseError("empty query id", line_no)
        if query_id in queries:
            raise ValidationError(f"duplicate query id {query_id!r}")
        tokens = tokenize(raw_text)
        if not tokens:
            raise ValidationError(f"query {query_id!r} has no terms")
        queries[query_id] = tokens
    return QuerySet(queries)


def parse_term_stats(text: str) -> TermStatistics:
    """Parse a term-statistics file: ``N <doc_count>`` then ``term df`` lines."""
    lines = [
        (no, line) for no, line in enumerate(text.splitlines(), start=1) if line.strip()
    ]
    if not lines:
        raise ParseError("missing 'N <doc_count>' header")
    header_no, header = lines[0]
    fields = header.split()
    if len(fields) != 2 or fields[0] != "N":
        raise ParseError("missing 'N <doc_count>' header", header_no)
    try:
        doc_count = int(fields[1])
    except ValueError:
        raise ParseError(f"unparsable doc count {fields[1]!r}", header_no) from None
    if doc_count < 1:
        raise ValidationError(f"doc count must be >= 1, got {doc_count}")

    doc_freq: dict[str, int] = {}
    for line_no, line in lines[1:]:
        fields = line.split()
        if len(fields) != 2:
            raise ParseError(f"expected 'term df', got {len(fields)} fields", line_no)
        term, df_field = fields[0].lower(), fields[1]
        try:
            df = int(df_field)
        except ValueError:
            raise ParseError(f"unparsable df {df_field!r}", line_no) from None
        if df < 1:
            raise ValidationError(f"df({term!r}) must be positive, got {df}")
        if df > doc_count:
            raise ValidationError(f"df({term!r}) = {df} exceeds N = {doc_count}")
        if term in doc_freq and doc_freq[term] != df:
            raise ValidationError(f"conflicting df values for term {term!r}")
        doc_freq[term] = df
    return TermStatistics(doc_count, doc_freq)


def write_qrels(judgments: JudgmentSet) -> str:
    """Serialize a JudgmentSet as qrels text, sorted by qid then docid.

    Round-trips bit-exactly through :func:`parse_qrels` (the iteration field
    is emitted as 0).
    """
    lines = [
        f"{query_id} 0 {doc_id} {grade}\n"
        for (query_id, doc_id), grade in sorted(judgments.grades.items())
    ]
    return "".join(lines)
