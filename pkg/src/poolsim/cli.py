"""Command-line frontend.

Subcommands: ``qpp`` (dump per-(query, system) estimates), ``pool`` (build
one pool and its depth sidecar), ``simulate`` (the full study) and
``gen-synthetic`` (write a seeded synthetic dataset). Options may also come
from a ``key = value`` config file; explicit flags win over file values.
Every handled failure prints a single ``poolsim: error: ...`` line on
stderr and exits 2.
"""

from __future__ import annotations

import argparse
import logging
import sys
import traceback
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .errors import ParseError, PoolsimError, ValidationError
from .experiment import (
    ExperimentConfig,
    cdp_avg_depth,
    format_report_csv,
    format_report_json,
    format_report_table,
    run_simulation,
)
from .pooling import (
    CdpFixed,
    DepthPolicy,
    VdpInverseLinear,
    VdpLinear,
    build_pool,
    write_pool_docs,
    write_pool_depths,
)
from .qpp import (
    DenominatorMode,
    NormalizationScope,
    QppConfig,
    estimate_runs,
    estimates_to_csv,
    max_normalize,
    normalized_by_pair,
)
from .synthetic import SyntheticSpec, generate, write_dataset
from .trec import parse_qrels, parse_queries, parse_run, parse_term_stats

log = logging.getLogger(__name__)

# Types used when reading values from a config file (flag values go through
# argparse; file values are converted here).
_OPTION_TYPES = {
    "runs": str,
    "qrels": str,
    "queries": str,
    "term_stats": str,
    "out": str,
    "dmin": int,
    "dmax": int,
    "rel_threshold": int,
    "qpp_k": int,
    "policies": str,
    "policy": str,
    "norm_scope": str,
    "denominator": str,
    "format": str,
    "threads": int,
    "seed": int,
    "systems": int,
    "docs": int,
    "run_length": int,
    "easy_fraction": float,
    "judge_depth": int,
}

_CHOICES = {
    "norm_scope": ("per-system", "global"),
    "denominator": ("idf", "mean-abs"),
    "format": ("table", "csv", "structured"),
}


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE", help="key = value config file; flags override")
    parser.add_argument("--out", metavar="DIR", help="output directory (default: stdout where possible)")
    parser.add_argument("--threads", type=int, metavar="N", help="worker cap for input parsing, 0 = auto (default: 0)")
    parser.add_argument("--seed", type=int, metavar="N", help="random seed (used by gen-synthetic; default: 0)")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (-vv for tracebacks)")


def _add_inputs(parser: argparse.ArgumentParser, with_qrels: bool) -> None:
    parser.add_argument("--runs", metavar="DIR", help="directory of TREC run files (one run per file)")
    if with_qrels:
        parser.add_argument("--qrels", metavar="FILE", help="full relevance judgments (TREC qrels)")
    parser.add_argument("--queries", metavar="FILE", help="query file: qid<TAB>text")
    parser.add_argument("--term-stats", dest="term_stats", metavar="FILE", help="term statistics: 'N <count>' header then 'term df' lines")


def _add_qpp_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--qpp-k", dest="qpp_k", type=int, metavar="N", help="estimation cutoff (default: dmax)")
    parser.add_argument("--denominator", metavar="MODE", help="collection-score mode: idf | mean-abs (default: idf)")
    parser.add_argument("--norm-scope", dest="norm_scope", metavar="SCOPE", help="max-normalization scope: per-system | global (default: per-system)")


def _add_depth_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--dmin", type=int, metavar="N", help="minimum pool depth")
    parser.add_argument("--dmax", type=int, metavar="N", help="maximum pool depth")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="poolsim",
        description="Simulate constant- and variable-depth pooling over TREC runs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_qpp = sub.add_parser("qpp", help="write per-(query, system) performance estimates as CSV")
    _add_inputs(p_qpp, with_qrels=False)
    _add_qpp_options(p_qpp)
    _add_depth_options(p_qpp)
    _add_common(p_qpp)
    p_qpp.set_defaults(func=cmd_qpp)

    p_pool = sub.add_parser("pool", help="build one pool and its depth sidecar")
    _add_inputs(p_pool, with_qrels=False)
    p_pool.add_argument("--policy", metavar="NAME", help="cdp-min | cdp-avg | cdp-max | vdp-l | vdp-il | cdp-<k>")
    _add_qpp_options(p_pool)
    _add_depth_options(p_pool)
    _add_common(p_pool)
    p_pool.set_defaults(func=cmd_pool)

    p_sim = sub.add_parser("simulate", help="run the full pooling study and emit a report")
    _add_inputs(p_sim, with_qrels=True)
    p_sim.add_argument("--rel-threshold", dest="rel_threshold", type=int, metavar="N", help="minimum grade counted relevant (default: 1)")
    p_sim.add_argument("--policies", metavar="LIST", help="comma-separated policy names (default: cdp-min,cdp-avg,cdp-max,vdp-l,vdp-il)")
    p_sim.add_argument("--format", metavar="FMT", help="report format: table | csv | structured (default: table)")
    _add_qpp_options(p_sim)
    _add_depth_options(p_sim)
    _add_common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_gen = sub.add_parser("gen-synthetic", help="write a seeded synthetic dataset")
    p_gen.add_argument("--systems", type=int, metavar="N", help="number of systems (default: 20)")
    p_gen.add_argument("--queries", type=int, metavar="N", help="number of queries (default: 50)")
    p_gen.add_argument("--docs", type=int, metavar="N", help="collection size (default: 5000)")
    p_gen.add_argument("--run-length", dest="run_length", type=int, metavar="N", help="documents per ranked list (default: 100)")
    p_gen.add_argument("--easy-fraction", dest="easy_fraction", type=float, metavar="F", help="fraction of easy queries (default: 0.5)")
    p_gen.add_argument("--judge-depth", dest="judge_depth", type=int, metavar="K", help="judge exactly the depth-K pool instead of all planted relevant docs")
    _add_common(p_gen)
    p_gen.set_defaults(func=cmd_gen_synthetic)

    return parser


def _load_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise PoolsimError(f"cannot read config file {path}: {exc}") from exc
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise PoolsimError(f"config {path}:{line_no}: expected 'key = value'")
        key, value = stripped.split("=", 1)
        key = key.strip().lower().replace("-", "_")
        if key not in _OPTION_TYPES:
            raise PoolsimError(f"config {path}:{line_no}: unknown option {key!r}")
        values[key] = value.strip()
    return values


def _merge_config(args: argparse.Namespace) -> argparse.Namespace:
    """Fill unset options from the config file, then validate choice values."""
    if getattr(args, "config", None):
        for key, raw in _load_config_file(args.config).items():
            if getattr(args, key, None) is None and hasattr(args, key):
                try:
                    setattr(args, key, _OPTION_TYPES[key](raw))
                except ValueError:
                    raise PoolsimError(
                        f"config option {key!r}: cannot convert {raw!r} to "
                        f"{_OPTION_TYPES[key].__name__}"
                    ) from None
    for key, allowed in _CHOICES.items():
        value = getattr(args, key, None)
        if value is not None and value not in allowed:
            raise PoolsimError(f"--{key.replace('_', '-')} must be one of {', '.join(allowed)}")
    return args


def _require(args: argparse.Namespace, name: str):
    value = getattr(args, name, None)
    if value is None:
        raise PoolsimError(f"missing required option --{name.replace('_', '-')}")
    return value


def _read_text(path: str, what: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise PoolsimError(f"{what} path does not exist: {path}")
    return p.read_text()


def _load_runs(runs_dir: str, threads: int | None):
    root = Path(runs_dir)
    if not root.is_dir():
        raise PoolsimError(f"runs path is not a directory: {runs_dir}")
    files = sorted(p for p in root.iterdir() if p.is_file())
    if not files:
        raise PoolsimError(f"runs directory is empty: {runs_dir}")
    workers = threads if threads else None

    def parse_one(path: Path):
        try:
            return parse_run(path.read_text())
        except (ParseError, ValidationError) as exc:
            raise PoolsimError(f"{path.name}: {exc}") from exc

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(parse_one, files))


def _load_optional_query_data(args: argparse.Namespace):
    queries = term_stats = None
    if getattr(args, "queries", None):
        queries = parse_queries(_read_text(args.queries, "queries"))
    if getattr(args, "term_stats", None):
        term_stats = parse_term_stats(_read_text(args.term_stats, "term stats"))
    return queries, term_stats


def _denominator_mode(args: argparse.Namespace) -> DenominatorMode:
    value = getattr(args, "denominator", None) or "idf"
    return DenominatorMode(value)


def _norm_scope(args: argparse.Namespace) -> NormalizationScope:
    value = getattr(args, "norm_scope", None) or "per-system"
    return NormalizationScope(value)


def _check_idf_inputs(args: argparse.Namespace, queries, term_stats, needed_by: str) -> None:
    if _denominator_mode(args) is DenominatorMode.IDF_MEAN and (
        queries is None or term_stats is None
    ):
        raise PoolsimError(
            f"{needed_by} with the idf denominator needs --queries and --term-stats "
            "(or pass --denominator mean-abs)"
        )


def _resolve_qpp_k(args: argparse.Namespace) -> int:
    if getattr(args, "qpp_k", None) is not None:
        return args.qpp_k
    if getattr(args, "dmax", None) is not None:
        return args.dmax
    raise PoolsimError("missing required option --qpp-k (or --dmax to default from)")


def _check_depth_bounds(args: argparse.Namespace) -> tuple[int, int]:
    d_min = _require(args, "dmin")
    d_max = _require(args, "dmax")
    if d_min < 1:
        raise PoolsimError(f"d_min must be >= 1, got {d_min}")
    if d_min > d_max:
        raise PoolsimError("d_min must not exceed d_max")
    return d_min, d_max


def _parse_policy(name: str, args: argparse.Namespace) -> DepthPolicy:
    lowered = name.strip().lower()
    if lowered in ("cdp-min", "cdp-avg", "cdp-max", "vdp-l", "vdp-il"):
        d_min, d_max = _check_depth_bounds(args)
        return {
            "cdp-min": CdpFixed(d_min, name="CDP-Min"),
            "cdp-avg": CdpFixed(cdp_avg_depth(d_min, d_max), name="CDP-Avg"),
            "cdp-max": CdpFixed(d_max, name="CDP-Max"),
            "vdp-l": VdpLinear(d_min, d_max, name="VDP-L"),
            "vdp-il": VdpInverseLinear(d_min, d_max, name="VDP-IL"),
        }[lowered]
    if lowered.startswith("cdp-"):
        try:
            k = int(lowered[4:])
        except ValueError:
            raise PoolsimError(f"unknown policy {name!r}") from None
        if k < 1:
            raise PoolsimError(f"constant depth must be >= 1, got {k}")
        return CdpFixed(k)
    raise PoolsimError(f"unknown policy {name!r}")


def _parse_policy_list(args: argparse.Namespace) -> tuple[DepthPolicy, ...]:
    spec = getattr(args, "policies", None) or "cdp-min,cdp-avg,cdp-max,vdp-l,vdp-il"
    names = [n for n in (part.strip() for part in spec.split(",")) if n]
    if not names:
        raise PoolsimError("--policies lists no policies")
    return tuple(_parse_policy(n, args) for n in names)


def _write_or_print(out_dir: str | None, filename: str, content: str) -> None:
    if out_dir is None:
        sys.stdout.write(content)
    else:
        target = Path(out_dir)
        target.mkdir(parents=True, exist_ok=True)
        (target / filename).write_text(content)
        log.info("wrote %s", target / filename)


def cmd_qpp(args: argparse.Namespace) -> int:
    runs = _load_runs(_require(args, "runs"), args.threads)
    queries, term_stats = _load_optional_query_data(args)
    _check_idf_inputs(args, queries, term_stats, "qpp")
    config = QppConfig(k=_resolve_qpp_k(args), denominator_mode=_denominator_mode(args))
    estimates = max_normalize(
        estimate_runs(runs, config, queries, term_stats), _norm_scope(args)
    )
    _write_or_print(args.out, "qpp.csv", estimates_to_csv(estimates))
    return 0


def cmd_pool(args: argparse.Namespace) -> int:
    runs = _load_runs(_require(args, "runs"), args.threads)
    policy = _parse_policy(_require(args, "policy"), args)
    estimates = None
    if not isinstance(policy, CdpFixed):
        queries, term_stats = _load_optional_query_data(args)
        _check_idf_inputs(args, queries, term_stats, "a variable-depth policy")
        config = QppConfig(k=_resolve_qpp_k(args), denominator_mode=_denominator_mode(args))
        estimates = normalized_by_pair(
            max_normalize(estimate_runs(runs, config, queries, term_stats), _norm_scope(args))
        )
    pool = build_pool(runs, policy, estimates)
    out = _require(args, "out")
    _write_or_print(out, "pool.txt", write_pool_docs(pool))
    _write_or_print(out, "depths.csv", write_pool_depths(pool))
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    runs = _load_runs(_require(args, "runs"), args.threads)
    full = parse_qrels(_read_text(_require(args, "qrels"), "qrels"))
    queries, term_stats = _load_optional_query_data(args)
    d_min, d_max = _check_depth_bounds(args)
    policies = _parse_policy_list(args)
    if any(not isinstance(p, CdpFixed) for p in policies):
        _check_idf_inputs(args, queries, term_stats, "a variable-depth policy")
    config = ExperimentConfig(
        d_min=d_min,
        d_max=d_max,
        rel_threshold=args.rel_threshold if args.rel_threshold is not None else 1,
        policies=policies,
        qpp=QppConfig(k=_resolve_qpp_k(args), denominator_mode=_denominator_mode(args)),
        norm_scope=_norm_scope(args),
    )
    report = run_simulation(runs, full, queries, term_stats, config)
    fmt = getattr(args, "format", None) or "table"
    filename, content = {
        "table": ("report.txt", format_report_table(report)),
        "csv": ("report.csv", format_report_csv(report)),
        "structured": ("report.json", format_report_json(report)),
    }[fmt]
    _write_or_print(args.out, filename, content)
    return 0


def cmd_gen_synthetic(args: argparse.Namespace) -> int:
    out = _require(args, "out")
    spec = SyntheticSpec(
        num_systems=args.systems if args.systems is not None else 20,
        num_queries=args.queries if args.queries is not None else 50,
        num_docs=args.docs if args.docs is not None else 5000,
        run_length=args.run_length if args.run_length is not None else 100,
        easy_fraction=args.easy_fraction if args.easy_fraction is not None else 0.5,
        judge_pool_depth=args.judge_depth,
        seed=args.seed if args.seed is not None else 0,
    )
    dataset = generate(spec)
    write_dataset(dataset, out)
    print(
        f"wrote {len(dataset.runs)} runs, {len(dataset.judgments)} judgments, "
        f"{len(dataset.queries.queries)} queries to {out}"
    )
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        args = _merge_config(args)
        return args.func(args)
    except (PoolsimError, ValueError, OSError) as exc:
        print(f"poolsim: error: {exc}", file=sys.stderr)
        if args.verbose > 1:
            traceback.print_exc(file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"poolsim: internal error: {exc}", file=sys.stderr)
        if args.verbose > 1:
            traceback.print_exc(file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
