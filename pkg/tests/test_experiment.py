"""Simulation driver: induced judgments, report rows, determinism, golden fixture."""

import json
import math
from pathlib import Path

import pytest

from poolsim import (
    CdpFixed,
    ExperimentConfig,
    JudgmentSet,
    PoolsimError,
    SystemRun,
    ValidationError,
    build_pool,
    cdp_avg_depth,
    default_policies,
    format_report_csv,
    format_report_json,
    format_report_table,
    induce_qrels,
    parse_qrels,
    parse_queries,
    parse_run,
    parse_term_stats,
    run_simulation,
)

GOLDEN = Path(__file__).parent / "data" / "golden"


def load_golden_inputs():
    runs = [parse_run(p.read_text()) for p in sorted((GOLDEN / "runs").iterdir())]
    full = parse_qrels((GOLDEN / "qrels.txt").read_text())
    queries = parse_queries((GOLDEN / "queries.tsv").read_text())
    stats = parse_term_stats((GOLDEN / "term_stats.txt").read_text())
    return runs, full, queries, stats


class TestInduceQrels:
    def test_subset_filter(self):
        pool = build_pool(
            [SystemRun.from_scores("s", {"q1": [("dA", 2.0), ("dB", 1.0)]})], CdpFixed(1)
        )
        full = JudgmentSet({("q1", "dA"): 2, ("q1", "dB"): 1})
        induced = induce_qrels(pool, full)
        assert induced.grades == {("q1", "dA"): 2}
        assert induced.provenance == "induced"

    def test_pool_covering_all_judged_docs_reproduces_full(self):
        pool = build_pool(
            [SystemRun.from_scores("s", {"q1": [("dA", 2.0), ("dB", 1.0)]})], CdpFixed(2)
        )
        full = JudgmentSet({("q1", "dA"): 2, ("q1", "dB"): 1})
        induced = induce_qrels(pool, full)
        assert induced.grades == full.grades
        assert induced.provenance == "induced"

    def test_empty_pool(self):
        pool = build_pool([SystemRun.from_scores("s", {})], CdpFixed(1))
        induced = induce_qrels(pool, JudgmentSet({("q1", "dA"): 1}))
        assert len(induced) == 0

    def test_requires_full_provenance(self):
        pool = build_pool([SystemRun.from_scores("s", {"q1": [("dA", 1.0)]})], CdpFixed(1))
        with pytest.raises(ValidationError, match="provenance"):
            induce_qrels(pool, JudgmentSet({("q1", "dA"): 1}, provenance="induced"))


class TestCdpAvgDepth:
    def test_paper_scale_intervals(self):
        assert cdp_avg_depth(10, 50) == 30
        assert cdp_avg_depth(1, 5) == 3

    def test_half_rounds_up(self):
        assert cdp_avg_depth(1, 4) == 3  # midpoint 2.5
        assert cdp_avg_depth(2, 5) == 4  # midpoint 3.5

    def test_default_policy_names(self):
        names = [p.name for p in default_policies(10, 50)]
        assert names == ["CDP-Min", "CDP-Avg", "CDP-Max", "VDP-L", "VDP-IL"]


class TestExperimentConfig:
    def test_bounds_validation(self):
        with pytest.raises(ValueError):
            ExperimentConfig(d_min=50, d_max=10)
        with pytest.raises(ValueError):
            ExperimentConfig(d_min=0, d_max=10)
        with pytest.raises(ValueError):
            ExperimentConfig(d_min=1, d_max=5, rel_threshold=0)

    def test_qpp_defaults_to_dmax(self):
        assert ExperimentConfig(d_min=10, d_max=50).resolved_qpp().k == 50


class TestRunSimulation:
    def test_golden_fixture_cells_match_hand_oracle(self):
        """Every report cell against independently derived closed forms.

        The fixture (3 systems, 2 queries, depth bounds [1, 3]) was worked
        through by hand before the driver existed: score spreads sqrt(6),
        sqrt(32/3), sqrt(1/6), sqrt(24.5/3), sqrt(2/3) over mean-idf
        denominators (ln10+ln100)/2 and ln20, normalized per system, floor-
        mapped to depths, pooled, and scored. The induced/full MAP vectors
        reduce to small fractions whose correlations have closed forms.
        """
        runs, full, queries, stats = load_golden_inputs()
        report = run_simulation(
            runs, full, queries, stats, ExperimentConfig(d_min=1, d_max=3)
        )
        oracle = {
            # avg_depth, pearson, kendall, coverage, avg_pool_size, pnc
            "CDP-Min": (1.0, 30 / math.sqrt(1332), 2 / math.sqrt(6), 4 / 6, 3.0,
                        (4 / 6) / math.log(3.0)),
            "CDP-Avg": (2.0, 1.0, 1.0, 1.0, 4.0, 1 / math.log(4.0)),
            "CDP-Max": (3.0, 1.0, 1.0, 1.0, 4.0, 1 / math.log(4.0)),
            "VDP-L": (13 / 6, 60 / math.sqrt(5328), 2 / math.sqrt(6), 5 / 6, 3.5,
                      (5 / 6) / math.log(3.5)),
            "VDP-IL": (1.5, 48 / math.sqrt(2736), 2 / math.sqrt(6), 5 / 6, 3.5,
                       (5 / 6) / math.log(3.5)),
        }
        assert [row.policy for row in report.rows] == list(oracle)
        for row in report.rows:
            want = oracle[row.policy]
            got = (row.avg_depth, row.pearson, row.kendall, row.coverage,
                   row.avg_pool_size, row.pnc)
            for got_value, want_value in zip(got, want):
                assert got_value == pytest.approx(want_value, rel=1e-12), row.policy

    def test_cdp_fixed_avg_depth_is_exact(self):
        runs, full, queries, stats = load_golden_inputs()
        report = run_simulation(
            runs, full, queries, stats, ExperimentConfig(d_min=1, d_max=3)
        )
        for row in report.rows:
            if row.policy.startswith("CDP"):
                assert row.avg_depth == float(int(row.avg_depth))

    def test_full_pool_identity_exact(self):
        """Judgments drawn exactly from the depth-k pool: agreement is perfect."""
        run_a = SystemRun.from_scores(
            "a", {"q1": [("dA", 3.0), ("dB", 2.0), ("dX", 1.0)],
                  "q2": [("dC", 3.0), ("dD", 2.0), ("dY", 1.0)]}
        )
        run_b = SystemRun.from_scores(
            "b", {"q1": [("dB", 3.0), ("dA", 2.0), ("dZ", 1.0)],
                  "q2": [("dD", 3.0), ("dC", 2.0), ("dW", 1.0)]}
        )
        pool = build_pool([run_a, run_b], CdpFixed(2))
        grades = {}
        for query_id, docs in pool.docs.items():
            for i, doc_id in enumerate(sorted(docs)):
                grades[(query_id, doc_id)] = 1 if i % 2 == 0 else 0
        full = JudgmentSet(grades, provenance="full")
        config = ExperimentConfig(d_min=1, d_max=3, policies=(CdpFixed(2),))
        report = run_simulation([run_a, run_b], full, None, None, config)
        row = report.rows[0]
        assert row.pearson == 1.0
        assert row.kendall == 1.0
        assert row.coverage == 1.0

    def test_zero_variance_scores_make_vdp_match_cdp_bounds(self):
        """All-constant scores zero every estimate: VDP-IL = CDP-Max, VDP-L = CDP-Min."""
        # Tied scores within each run (zero variance) but overlapping,
        # shifted doc sets so the two systems still earn different MAPs.
        runs = [
            SystemRun.from_scores(
                "a",
                {
                    "q1": [(d, 5.0) for d in ("dA", "dB", "dC", "dD", "dE")],
                    "q2": [(d, 2.0) for d in ("eA", "eB", "eC", "eD", "eE")],
                },
            ),
            SystemRun.from_scores(
                "b",
                {
                    "q1": [(d, 7.0) for d in ("dB", "dC", "dD", "dE", "dF")],
                    "q2": [(d, 3.0) for d in ("eB", "eC", "eD", "eE", "eF")],
                },
            ),
        ]
        full = JudgmentSet(
            {
                ("q1", "dA"): 1,
                ("q1", "dF"): 1,
                ("q1", "dC"): 0,
                ("q2", "eB"): 1,
                ("q2", "eE"): 1,
            },
            provenance="full",
        )
        report = run_simulation(
            runs, full, None, None, ExperimentConfig(d_min=2, d_max=5)
        )
        rows = {row.policy: row for row in report.rows}
        assert rows["VDP-IL"] == type(rows["VDP-IL"])(
            policy="VDP-IL",
            avg_depth=rows["CDP-Max"].avg_depth,
            pearson=rows["CDP-Max"].pearson,
            kendall=rows["CDP-Max"].kendall,
            coverage=rows["CDP-Max"].coverage,
            avg_pool_size=rows["CDP-Max"].avg_pool_size,
            pnc=rows["CDP-Max"].pnc,
        )
        for field in ("avg_depth", "pearson", "kendall", "coverage", "avg_pool_size", "pnc"):
            assert getattr(rows["VDP-L"], field) == getattr(rows["CDP-Min"], field)

    def test_reports_are_byte_identical_across_reruns(self):
        runs, full, queries, stats = load_golden_inputs()
        config = ExperimentConfig(d_min=1, d_max=3)
        first = run_simulation(runs, full, queries, stats, config)
        second = run_simulation(runs, full, queries, stats, config)
        assert format_report_table(first) == format_report_table(second)
        assert format_report_csv(first) == format_report_csv(second)
        assert format_report_json(first) == format_report_json(second)

    def test_needs_two_runs(self):
        runs, full, queries, stats = load_golden_inputs()
        with pytest.raises(ValidationError, match="at least 2"):
            run_simulation(runs[:1], full, queries, stats, ExperimentConfig(d_min=1, d_max=3))

    def test_policy_failures_carry_the_policy_name(self):
        # relevant documents sit at rank 3 of both runs, so the depth-1 pool
        # induces judgments with nothing relevant and MAP cannot average
        runs = [
            SystemRun.from_scores("a", {"q1": [("dX", 3.0), ("dY", 2.0), ("dRel", 1.0)]}),
            SystemRun.from_scores("b", {"q1": [("dY", 3.0), ("dX", 2.0), ("dRel", 1.0)]}),
        ]
        full = JudgmentSet({("q1", "dRel"): 1}, provenance="full")
        config = ExperimentConfig(
            d_min=1, d_max=3, policies=(CdpFixed(1, name="CDP-Min"),)
        )
        with pytest.raises(PoolsimError, match="policy CDP-Min"):
            run_simulation(runs, full, None, None, config)

    def test_metadata_contents(self):
        runs, full, queries, stats = load_golden_inputs()
        report = run_simulation(
            runs, full, queries, stats, ExperimentConfig(d_min=1, d_max=3)
        )
        meta = report.metadata
        assert meta["systems"] == ["sysA", "sysB", "sysC"]
        assert meta["num_queries"] == 2
        assert meta["config"]["qpp_k"] == 3
        assert meta["config"]["policies"] == [
            "CDP-Min", "CDP-Avg", "CDP-Max", "VDP-L", "VDP-IL",
        ]
        assert meta["decisions"]  # methodology choices are surfaced


class TestReportFormats:
    def _report(self):
        runs, full, queries, stats = load_golden_inputs()
        return run_simulation(runs, full, queries, stats, ExperimentConfig(d_min=1, d_max=3))

    def test_table_column_order(self):
        header = format_report_table(self._report()).splitlines()[0].split()
        assert header == ["Pool", "Avg", "Depth", "P-r", "K-tau", "Coverage",
                          "Avg", "Pool", "Size", "PNC"]

    def test_csv_round_trips_full_precision(self):
        report = self._report()
        lines = format_report_csv(report).strip().splitlines()
        assert lines[0] == "policy,avg_depth,pearson_r,kendall_tau,coverage,avg_pool_size,pnc"
        for row, line in zip(report.rows, lines[1:]):
            cells = line.split(",")
            assert cells[0] == row.policy
            assert float(cells[1]) == row.avg_depth
            assert float(cells[2]) == row.pearson

    def test_json_is_loadable_and_complete(self):
        report = self._report()
        payload = json.loads(format_report_json(report))
        assert len(payload["rows"]) == len(report.rows)
        assert payload["metadata"]["config"]["d_min"] == 1
