"""Aggregate reputation ratings, badge policies, and survey sampling.

Each centrality measure is min-max normalized, the five are summed, and
the sum is min-max normalized again, giving every contributor a rating in
[0, 1]. Badges are a thresholded view of that rating; the threshold policy
is configurable because no single cutoff is canonical.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np

from .centrality import MEASURES, CentralityTable
from .errors import SamplingError, ValidationError
from .network import DeveloperNetwork

SCORE_CSV_HEADER = [
    "contributor",
    "deg_n",
    "clo_n",
    "bet_n",
    "eig_n",
    "pr_n",
    "aggregate",
    "badge",
]

DEFAULT_MIN_COLLABORATORS = 5
TOP_STRATUM_SIZE = 50
TOP_PICKS = 3
REST_PICKS = 2


@dataclass(frozen=True)
class ReputationScore:
    contributor: str
    degree: float
    closeness: float
    betweenness: float
    eigenvector: float
    pagerank: float
    aggregate: float
    badge: bool = False

    def normalized(self, measure: str) -> float:
        if measure not in MEASURES:
            raise ValidationError(f"unknown measure {measure!r}")
        return getattr(self, measure)


@dataclass(frozen=True)
class BadgePolicy:
    """Either a quantile of the aggregate distribution or an absolute cutoff."""

    mode: str = "quantile"
    quantile: float = 0.9
    absolute_threshold: float = 0.0

    def __post_init__(self) -> None:
        if self.mode not in ("quantile", "absolute"):
            raise ValidationError(f"unknown badge mode {self.mode!r}")
        if self.mode == "quantile" and not 0.0 < self.quantile < 1.0:
            raise ValidationError("badge quantile must lie in (0, 1)")
        # Aggregates live in [0, 1], but out-of-range absolute thresholds are
        # accepted so "badge nobody" (>1) and "badge everyone" (<=0) work.


@dataclass(frozen=True)
class SamplePick:
    contributor: str
    stratum: str  # "top" or "rest"


@dataclass(frozen=True)
class SamplePlan:
    respondent: str
    direct: list[SamplePick]
    others: list[SamplePick]

    def all_contributors(self) -> list[str]:
        return [p.contributor for p in self.direct + self.others]

    def to_dict(self) -> dict:
        return {
            "respondent": self.respondent,
            "direct": [
                {"contributor": p.contributor, "stratum": p.stratum}
                for p in self.direct
            ],
            "others": [
                {"contributor": p.contributor, "stratum": p.stratum}
                for p in self.others
            ],
        }


def minmax_normalize(values: Mapping[str, float]) -> dict[str, float]:
    """Map values onto [0, 1] affinely; a constant column maps to all zeros."""
    if not values:
        raise ValidationError("cannot normalize an empty value map")
    lo = min(values.values())
    hi = max(values.values())
    if hi == lo:
        return {k: 0.0 for k in values}
    span = hi - lo
    return {k: (v - lo) / span for k, v in values.items()}


def aggregate_score(
    table: CentralityTable, mode: str = "minmax"
) -> dict[str, ReputationScore]:
    """Combine the five measures into one rating per contributor.

    Each measure is min-max normalized and the per-contributor sum is
    reduced to [0, 1]: mode "minmax" (default) min-max normalizes the sum
    so the extremes are attained; mode "mean" divides by five.
    """
    if not table.contributors:
        raise ValidationError("centrality table is empty")
    if mode not in ("minmax", "mean"):
        raise ValidationError(f"unknown aggregate mode {mode!r}")
    normalized = {m: minmax_normalize(table.measure(m)) for m in MEASURES}
    sums = {
        v: sum(normalized[m][v] for m in MEASURES) for v in table.contributors
    }
    if mode == "minmax":
        aggregate = minmax_normalize(sums)
    else:
        aggregate = {v: s / len(MEASURES) for v, s in sums.items()}
    return {
        v: ReputationScore(
            contributor=v,
            degree=normalized["degree"][v],
            closeness=normalized["closeness"][v],
            betweenness=normalized["betweenness"][v],
            eigenvector=normalized["eigenvector"][v],
            pagerank=normalized["pagerank"][v],
            aggregate=aggregate[v],
        )
        for v in sorted(table.contributors)
    }


def assign_badges(
    scores: Mapping[str, ReputationScore], policy: BadgePolicy
) -> dict[str, ReputationScore]:
    """Badge every contributor whose aggregate clears the policy threshold."""
    if not scores:
        raise ValidationError("no scores to badge")
    if policy.mode == "quantile":
        values = np.array([s.aggregate for s in scores.values()])
        threshold = float(np.quantile(values, policy.quantile, method="higher"))
    else:
        threshold = policy.absolute_threshold
    return {
        v: replace(s, badge=s.aggregate >= threshold)
        for v, s in scores.items()
    }


def eligible_respondents(
    net: DeveloperNetwork, min_collaborators: int = DEFAULT_MIN_COLLABORATORS
) -> set[str]:
    """Contributors who directly collaborated with at least min_collaborators."""
    return {v for v in net.vertices() if net.degree(v) >= min_collaborators}


def _draw(
    rng: np.random.Generator, pool: list[str], k: int
) -> list[str]:
    picked = rng.choice(len(pool), size=k, replace=False)
    return [pool[int(i)] for i in picked]


def _sample_group(
    rng: np.random.Generator,
    members: list[str],
    ranking: dict[str, tuple[float, str]],
    group_name: str,
) -> list[SamplePick]:
    if len(members) < TOP_PICKS + REST_PICKS:
        raise SamplingError(
            f"group {group_name!r} has only {len(members)} members;"
            f" {TOP_PICKS + REST_PICKS} needed"
        )
    ranked = sorted(members, key=lambda v: ranking[v])
    cut = min(TOP_STRATUM_SIZE, len(ranked))
    top, rest = ranked[:cut], ranked[cut:]
    picks = [SamplePick(v, "top") for v in _draw(rng, top, TOP_PICKS)]
    chosen = {p.contributor for p in picks}
    need = REST_PICKS
    if rest:
        take = min(need, len(rest))
        picks.extend(SamplePick(v, "rest") for v in _draw(rng, rest, take))
        need -= take
    if need:
        backfill_pool = [v for v in top if v not in chosen]
        picks.extend(SamplePick(v, "top") for v in _draw(rng, backfill_pool, need))
    return picks


def stratified_sample(
    net: DeveloperNetwork,
    scores: Mapping[str, ReputationScore],
    respondent: str,
    seed: int,
) -> SamplePlan:
    """Draw the ten contributors shown to one survey respondent.

    Five come from the respondent's direct collaborators and five from
    contributors it shares no edge with. Within each group, members are
    ranked by aggregate rating (ties broken by login); three picks are drawn
    uniformly from the top 50 of that group and two from the remainder, with
    deterministic seeded draws. When a group has no remainder beyond its top
    stratum, the shortfall is backfilled from the top stratum and labeled by
    its actual origin.
    """
    if not net.has_vertex(respondent):
        raise SamplingError(f"respondent {respondent!r} is not in the network")
    neighbors = net.neighbors(respondent)
    non_neighbors = [
        v
        for v in net.vertices()
        if v != respondent and v not in set(neighbors)
    ]
    ranking = {
        v: (-scores[v].aggregate, v) for v in net.vertices() if v in scores
    }
    missing = [v for v in neighbors + non_neighbors if v not in ranking]
    if missing:
        raise SamplingError(f"no score for contributor {missing[0]!r}")
    rng = np.random.default_rng(seed)
    direct = _sample_group(rng, neighbors, ranking, "direct collaborators")
    others = _sample_group(rng, non_neighbors, ranking, "non-collaborators")
    return SamplePlan(respondent=respondent, direct=direct, others=others)


def scores_to_csv(scores: Mapping[str, ReputationScore]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(SCORE_CSV_HEADER)
    for v in sorted(scores):
        s = scores[v]
        writer.writerow(
            [
                v,
                repr(s.degree),
                repr(s.closeness),
                repr(s.betweenness),
                repr(s.eigenvector),
                repr(s.pagerank),
                repr(s.aggregate),
                "true" if s.badge else "false",
            ]
        )
    return buf.getvalue()


def scores_from_csv(data: bytes | str) -> dict[str, ReputationScore]:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration as exc:
        raise ValidationError("scores csv input is empty") from exc
    if header != SCORE_CSV_HEADER:
        raise ValidationError(f"unexpected scores csv header: {header}")
    out: dict[str, ReputationScore] = {}
    for row in reader:
        if not row:
            continue
        if len(row) != len(SCORE_CSV_HEADER):
            raise ValidationError(f"scores csv row has {len(row)} fields")
        out[row[0]] = ReputationScore(
            contributor=row[0],
            degree=float(row[1]),
            closeness=float(row[2]),
            betweenness=float(row[3]),
            eigenvector=float(row[4]),
            pagerank=float(row[5]),
            aggregate=float(row[6]),
            badge=row[7] == "true",
        )
    return out
