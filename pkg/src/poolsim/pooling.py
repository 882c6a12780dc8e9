"""Depth policies and pool construction.

A pool for a query is the union of per-run ranking prefixes. Constant-depth
policies use one prefix length everywhere; variable-depth policies derive
the prefix length for each (query, run) pair from that pair's normalized
performance estimate, mapped linearly (or inverse-linearly) into
[d_min, d_max].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence, Union

from .errors import ValidationError
from .trec import SystemRun


@dataclass(frozen=True)
class CdpFixed:
    """Constant depth: every (query, run) prefix has length k."""

    k: int
    name: str | None = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"depth must be >= 1, got {self.k}")


@dataclass(frozen=True)
class VdpLinear:
    """Depth grows linearly with the normalized estimate."""

    d_min: int
    d_max: int
    name: str | None = None

    def __post_init__(self):
        _check_bounds(self.d_min, self.d_max)


@dataclass(frozen=True)
class VdpInverseLinear:
    """Depth shrinks linearly as the normalized estimate grows."""

    d_min: int
    d_max: int
    name: str | None = None

    def __post_init__(self):
        _check_bounds(self.d_min, self.d_max)


DepthPolicy = Union[CdpFixed, VdpLinear, VdpInverseLinear]


def _check_bounds(d_min: int, d_max: int) -> None:
    if d_min < 1:
        raise ValueError(f"d_min must be >= 1, got {d_min}")
    if d_min > d_max:
        raise ValueError(f"d_min must not exceed d_max, got [{d_min}, {d_max}]")


def policy_name(policy: DepthPolicy) -> str:
    """Display name for report rows; explicit names win over defaults."""
    if policy.name:
        return policy.name
    if isinstance(policy, CdpFixed):
        return f"CDP-{policy.k}"
    return "VDP-L" if isinstance(policy, VdpLinear) else "VDP-IL"


def depth_linear(phi_norm: float, d_min: int, d_max: int) -> int:
    """d_min + floor(phi * (d_max - d_min)); phi must lie in [0, 1]."""
    _check_bounds(d_min, d_max)
    if not 0.0 <= phi_norm <= 1.0:
        raise ValueError(f"normalized estimate {phi_norm} outside [0, 1]")
    return d_min + math.floor(phi_norm * (d_max - d_min))


def depth_inverse_linear(phi_norm: float, d_min: int, d_max: int) -> int:
    """d_min + floor((1 - phi) * (d_max - d_min)); the mirror of depth_linear."""
    _check_bounds(d_min, d_max)
    if not 0.0 <= phi_norm <= 1.0:
        raise ValueError(f"normalized estimate {phi_norm} outside [0, 1]")
    return d_min + math.floor((1.0 - phi_norm) * (d_max - d_min))


@dataclass(frozen=True)
class Pool:
    """Per-query pooled doc ids plus the depth used for each (query, run).

    ``short_runs`` lists (query_id, system_tag) pairs whose ranked list was
    shorter than the target depth and contributed everything it had.
    """

    policy: DepthPolicy
    docs: Mapping[str, frozenset[str]]
    depths: Mapping[tuple[str, str], int]
    short_runs: tuple[tuple[str, str], ...] = ()

    def query_ids(self) -> set[str]:
        return set(self.docs)

    def total_docs(self) -> int:
        return sum(len(d) for d in self.docs.values())


def _pair_depth(
    policy: DepthPolicy,
    query_id: str,
    system_tag: str,
    estimates: Mapping[tuple[str, str], float] | None,
) -> int:
    if isinstance(policy, CdpFixed):
        return policy.k
    phi = estimates[(query_id, system_tag)]  # presence checked by build_pool
    if isinstance(policy, VdpLinear):
        return depth_linear(phi, policy.d_min, policy.d_max)
    return depth_inverse_linear(phi, policy.d_min, policy.d_max)


def build_pool(
    runs: Sequence[SystemRun],
    policy: DepthPolicy,
    estimates: Mapping[tuple[str, str], float] | None = None,
    query_ids: Iterable[str] | None = None,
) -> Pool:
    """Union the per-run prefixes dictated by ``policy`` into a Pool.

    ``estimates`` maps (query_id, system_tag) to a normalized estimate and
    is required for variable-depth policies; a missing pair for a run that
    retrieved the query is an error (no silent default). ``query_ids``
    defaults to the union of query ids across runs; queries a run did not
    retrieve contribute nothing for that run. The result is independent of
    run order.
    """
    tags = [run.system_tag for run in runs]
    if len(set(tags)) != len(tags):
        raise ValidationError(f"duplicate system tags in run list: {sorted(tags)}")
    if query_ids is None:
        ids = set()
        for run in runs:
            ids |= run.queries()
    else:
        ids = set(query_ids)

    needs_estimates = not isinstance(policy, CdpFixed)
    if needs_estimates:
        if estimates is None:
            raise ValidationError(
                f"policy {policy_name(policy)} requires normalized estimates"
            )
        missing = [
            (query_id, run.system_tag)
            for query_id in sorted(ids)
            for run in runs
            if query_id in run.rankings and (query_id, run.system_tag) not in estimates
        ]
        if missing:
            raise ValidationError(f"missing estimates for pairs: {missing}")

    docs: dict[str, frozenset[str]] = {}
    depths: dict[tuple[str, str], int] = {}
    short_runs: list[tuple[str, str]] = []
    for query_id in sorted(ids):
        pooled: set[str] = set()
        for run in sorted(runs, key=lambda r: r.system_tag):
            ranking = run.rankings.get(query_id)
            if ranking is None:
                continue
            depth = _pair_depth(policy, query_id, run.system_tag, estimates)
            depths[(query_id, run.system_tag)] = depth
            if len(ranking) < depth:
                short_runs.append((query_id, run.system_tag))
            pooled.update(d.doc_id for d in ranking[:depth])
        docs[query_id] = frozenset(pooled)
    return Pool(policy, docs, depths, tuple(short_runs))


def write_pool_docs(pool: Pool) -> str:
    """Pool export: one ``query_id doc_id`` line per pooled document, sorted."""
    lines = []
    for query_id in sorted(pool.docs):
        for doc_id in sorted(pool.docs[query_id]):
            lines.append(f"{query_id} {doc_id}\n")
    return "".join(lines)


def write_pool_depths(pool: Pool) -> str:
    """Depth sidecar: CSV of ``query_id,system_tag,depth``, sorted."""
    lines = ["query_id,system_tag,depth"]
    for (query_id, system_tag), depth in sorted(pool.depths.items()):
        lines.append(f"{query_id},{system_tag},{depth}")
    return "\n".join(lines) + "\n"
