"""Parser and writer behavior: canonicalization, validation, round trips."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from poolsim import (
    JudgmentSet,
    ParseError,
    SystemRun,
    ValidationError,
    parse_qrels,
    parse_queries,
    parse_run,
    parse_term_stats,
    tokenize,
    write_qrels,
)


class TestParseRun:
    def test_already_canonical(self):
        run = parse_run("q1 Q0 dA 1 9.5 sysX\nq1 Q0 dB 2 7.0 sysX")
        assert run.system_tag == "sysX"
        assert run.doc_ids("q1") == ["dA", "dB"]
        assert run.scores("q1") == [9.5, 7.0]
        assert [d.rank for d in run.rankings["q1"]] == [1, 2]

    def test_score_ties_break_by_doc_id(self):
        run = parse_run("q1 Q0 dB 1 9.0 s\nq1 Q0 dA 2 9.0 s")
        assert run.doc_ids("q1") == ["dA", "dB"]

    def test_resorts_by_score_ignoring_file_ranks(self):
        text = "q1 Q0 dLow 1 1.0 s\nq1 Q0 dHigh 2 5.0 s"
        run = parse_run(text)
        assert run.doc_ids("q1") == ["dHigh", "dLow"]
        assert [d.rank for d in run.rankings["q1"]] == [1, 2]

    def test_unparsable_rank_is_a_parse_error_with_line(self):
        with pytest.raises(ParseError) as err:
            parse_run("q1 Q0 dA one 9.5 sysX")
        assert err.value.line_no == 1

    def test_wrong_field_count(self):
        with pytest.raises(ParseError, match="6 fields"):
            parse_run("q1 Q0 dA 1 9.5")

    def test_unparsable_score(self):
        with pytest.raises(ParseError, match="score"):
            parse_run("q1 Q0 dA 1 high sysX")

    def test_non_finite_score(self):
        with pytest.raises(ParseError, match="non-finite"):
            parse_run("q1 Q0 dA 1 inf sysX")

    def test_duplicate_document(self):
        with pytest.raises(ValidationError, match="duplicate"):
            parse_run("q1 Q0 dA 1 9.0 s\nq1 Q0 dA 2 8.0 s")

    def test_empty_input(self):
        with pytest.raises(ValidationError):
            parse_run("\n\n")

    def test_blank_lines_and_extra_whitespace_ok(self):
        run = parse_run("\nq1  Q0\tdA 1 9.5 sysX\n\n")
        assert run.doc_ids("q1") == ["dA"]

    def test_first_line_tag_wins(self):
        run = parse_run("q1 Q0 dA 1 9.0 first\nq2 Q0 dB 1 8.0 second")
        assert run.system_tag == "first"

    @given(
        st.dictionaries(
            st.text("qr", min_size=1, max_size=3),
            st.lists(
                st.tuples(st.text("abcd", min_size=1, max_size=4), st.floats(-50, 50)),
                min_size=1,
                max_size=8,
                unique_by=lambda p: p[0],
            ),
            min_size=1,
            max_size=4,
        )
    )
    @settings(max_examples=100)
    def test_canonicalization_is_idempotent_and_ranks_contiguous(self, scored):
        once = SystemRun.from_scores("tag", scored)
        twice = SystemRun.from_scores(
            "tag", {q: [(d.doc_id, d.score) for d in pairs] for q, pairs in once.rankings.items()}
        )
        assert once == twice
        for ranking in once.rankings.values():
            assert [d.rank for d in ranking] == list(range(1, len(ranking) + 1))
            scores = [d.score for d in ranking]
            assert scores == sorted(scores, reverse=True)


class TestParseQrels:
    def test_basic(self):
        judgments = parse_qrels("q1 0 dA 2\nq1 0 dB 0")
        assert judgments.grades == {("q1", "dA"): 2, ("q1", "dB"): 0}
        assert judgments.provenance == "full"

    def test_conflicting_duplicate(self):
        with pytest.raises(ValidationError, match="conflicting"):
            parse_qrels("q1 0 dA 2\nq1 0 dA 1")

    def test_agreeing_duplicate_ok(self):
        judgments = parse_qrels("q1 0 dA 2\nq1 0 dA 2")
        assert judgments.grades == {("q1", "dA"): 2}

    def test_negative_grade(self):
        with pytest.raises(ValidationError, match="negative"):
            parse_qrels("q1 0 dA -1")

    def test_empty_input_warns_but_parses(self, caplog):
        with caplog.at_level("WARNING"):
            judgments = parse_qrels("")
        assert len(judgments) == 0
        assert any("empty" in r.message for r in caplog.records)

    def test_unparsable_grade(self):
        with pytest.raises(ParseError):
            parse_qrels("q1 0 dA two")


class TestParseQueries:
    def test_basic(self):
        queries = parse_queries("q1\tdeep learning track")
        assert queries.terms("q1") == ("deep", "learning", "track")

    def test_punctuation_and_case(self):
        queries = parse_queries("q1\tIR?! eval")
        assert queries.terms("q1") == ("ir", "eval")

    def test_empty_text(self):
        with pytest.raises(ValidationError):
            parse_queries("q1\t")

    def test_punctuation_only_text(self):
        with pytest.raises(ValidationError):
            parse_queries("q1\t?!...")

    def test_duplicate_id(self):
        with pytest.raises(ValidationError, match="duplicate"):
            parse_queries("q1\tcats\nq1\tdogs")

    def test_missing_tab(self):
        with pytest.raises(ParseError):
            parse_queries("q1 no tab here")

    def test_tokenize_keeps_digits(self):
        assert tokenize("IPv6 routing-2024") == ("ipv6", "routing", "2024")


class TestParseTermStats:
    def test_basic(self):
        stats = parse_term_stats("N 1000\nlearning 50")
        assert stats.doc_count == 1000
        assert stats.doc_freq == {"learning": 50}

    def test_df_above_doc_count(self):
        with pytest.raises(ValidationError, match="exceeds"):
            parse_term_stats("N 10\nx 11")

    def test_missing_header(self):
        with pytest.raises(ParseError, match="header"):
            parse_term_stats("learning 50")

    def test_terms_lowercased(self):
        stats = parse_term_stats("N 10\nLearning 5")
        assert "learning" in stats.doc_freq

    def test_zero_df(self):
        with pytest.raises(ValidationError):
            parse_term_stats("N 10\nx 0")


class TestWriteQrels:
    def test_single_line(self):
        assert write_qrels(JudgmentSet({("q1", "dA"): 2})) == "q1 0 dA 2\n"

    def test_empty(self):
        assert write_qrels(JudgmentSet({})) == ""

    def test_sorted_output(self):
        text = write_qrels(JudgmentSet({("q2", "dA"): 1, ("q1", "dB"): 0, ("q1", "dA"): 2}))
        assert text == "q1 0 dA 2\nq1 0 dB 0\nq2 0 dA 1\n"

    @given(
        st.dictionaries(
            st.tuples(
                st.text("pq", min_size=1, max_size=3), st.text("dxyz", min_size=1, max_size=4)
            ),
            st.integers(0, 4),
            max_size=20,
        )
    )
    @settings(max_examples=200)
    def test_round_trip(self, grades):
        original = JudgmentSet(grades, provenance="full")
        assert parse_qrels(write_qrels(original)) == original
