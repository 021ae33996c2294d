"""Seeded synthetic inputs: small-world networks and survey responses.

The generators exist so the statistical machinery can be exercised against
known ground truth: a ring-lattice-with-rewiring network has closed-form
clustering at zero rewiring, and responses drawn from known coefficients
let a fit demonstrate recovery.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .centrality import CentralityTable
from .errors import ValidationError
from .lmm import ModelFrame
from .network import DeveloperNetwork, EdgeWeights, Pair, ordered_pair
from .reputation import minmax_normalize


@dataclass(frozen=True)
class SynthNetworkSpec:
    n: int
    k: int
    p_rewire: float
    weight_max: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.k % 2 != 0:
            raise ValidationError("ring-lattice degree k must be even")
        if not 0 < self.k < self.n:
            raise ValidationError("need 0 < k < n")
        if not 0.0 <= self.p_rewire <= 1.0:
            raise ValidationError("p_rewire must lie in [0, 1]")
        if self.weight_max < 1:
            raise ValidationError("weight_max must be at least 1")


@dataclass(frozen=True)
class SynthResponseSpec:
    true_beta: dict[str, float]
    sigma_alpha: float
    sigma_eps: float
    responses_per_contributor: int = 1
    rounding: str = "continuous"
    seed: int = 0

    def __post_init__(self) -> None:
        if "intercept" not in self.true_beta:
            raise ValidationError("true_beta must include an 'intercept' entry")
        if self.sigma_alpha < 0 or self.sigma_eps < 0:
            raise ValidationError("noise scales must be non-negative")
        if self.responses_per_contributor < 1:
            raise ValidationError("responses_per_contributor must be at least 1")
        if self.rounding not in ("continuous", "clamped_1_4"):
            raise ValidationError(f"unknown rounding mode {self.rounding!r}")


def _vertex_name(i: int) -> str:
    return f"dev{i:04d}"


def generate_network(spec: SynthNetworkSpec) -> DeveloperNetwork:
    """Watts-Strogatz-style small-world collaboration network.

    Starts from a ring lattice where every vertex links to its k nearest
    neighbors, then rewires each edge's far endpoint with probability
    p_rewire. Edge totals are uniform integers in 1..weight_max, split
    randomly between co-edit and review counts. Deterministic per seed.
    """
    rng = np.random.default_rng(spec.seed)
    n, k = spec.n, spec.k
    edges: set[tuple[int, int]] = set()
    for offset in range(1, k // 2 + 1):
        for u in range(n):
            v = (u + offset) % n
            edges.add((u, v) if u < v else (v, u))
    if spec.p_rewire > 0:
        for offset in range(1, k // 2 + 1):
            for u in range(n):
                v = (u + offset) % n
                key = (u, v) if u < v else (v, u)
                if key not in edges or rng.random() >= spec.p_rewire:
                    continue
                candidates = [
                    w
                    for w in range(n)
                    if w != u and (min(u, w), max(u, w)) not in edges
                ]
                if not candidates:
                    continue
                w = candidates[int(rng.integers(len(candidates)))]
                edges.discard(key)
                edges.add((min(u, w), max(u, w)))
    weighted: dict[Pair, EdgeWeights] = {}
    for u, v in sorted(edges):
        total = int(rng.integers(1, spec.weight_max + 1))
        coedit = int(rng.integers(0, total + 1))
        weighted[ordered_pair(_vertex_name(u), _vertex_name(v))] = EdgeWeights(
            coedit=coedit, review=total - coedit
        )
    return DeveloperNetwork([_vertex_name(i) for i in range(n)], weighted)


def synth_responses(
    net: DeveloperNetwork,
    table: CentralityTable,
    spec: SynthResponseSpec,
) -> ModelFrame:
    """Draw survey responses with known coefficients over a centrality table.

    Each contributor's normalized measures form its fixed-effect row; the
    response is the linear predictor plus a per-contributor intercept draw
    and per-response noise. Clamped mode rounds to the 1..4 review scale.
    """
    measure_names = [c for c in spec.true_beta if c != "intercept"]
    for name in measure_names:
        table.measure(name)
    contributors = table.contributors
    if not contributors:
        raise ValidationError("centrality table is empty")
    normalized = {m: minmax_normalize(table.measure(m)) for m in measure_names}
    rng = np.random.default_rng(spec.seed)
    group_effects = {
        v: rng.normal(0.0, spec.sigma_alpha) if spec.sigma_alpha > 0 else 0.0
        for v in contributors
    }
    rows = []
    y = []
    groups = []
    for v in contributors:
        x_row = [1.0] + [normalized[m][v] for m in measure_names]
        mean = sum(
            coef * value
            for coef, value in zip(
                [spec.true_beta["intercept"]]
                + [spec.true_beta[m] for m in measure_names],
                x_row,
            )
        )
        for _ in range(spec.responses_per_contributor):
            noise = rng.normal(0.0, spec.sigma_eps) if spec.sigma_eps > 0 else 0.0
            value = mean + group_effects[v] + noise
            if spec.rounding == "clamped_1_4":
                value = float(min(4, max(1, round(value))))
            rows.append(x_row)
            y.append(value)
            groups.append(v)
    return ModelFrame(
        y=np.array(y),
        X=np.array(rows),
        columns=["intercept"] + measure_names,
        groups=groups,
    )
