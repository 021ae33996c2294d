"""The five centrality measures used as the contributor reputation proxy.

Collaboration counts express connection strength, so the shortest-path
measures (closeness, betweenness) default to distance = 1/weight; the raw
orientation is available for sensitivity runs. Eigenvector centrality and
PageRank operate on the weighted adjacency directly, and degree centrality
is unweighted unless the strength variant is enabled.
"""

from __future__ import annotations

import csv
import heapq
import io
import math
from dataclasses import dataclass, field
from typing import Callable

from .errors import ConvergenceError, ValidationError
from .network import DeveloperNetwork

MEASURES = ("degree", "closeness", "betweenness", "eigenvector", "pagerank")

CSV_HEADER = ["contributor"] + list(MEASURES)


@dataclass(frozen=True)
class CentralityConfig:
    distance_transform: str = "inverse"
    pagerank_damping: float = 0.85
    pagerank_tol: float = 1e-9
    eigen_tol: float = 1e-6
    eigen_max_iter: int = 1000
    tie_epsilon: float = 1e-12
    degree_weighted: bool = False

    def __post_init__(self) -> None:
        if self.distance_transform not in ("inverse", "raw"):
            raise ValidationError(
                f"distance_transform must be 'inverse' or 'raw',"
                f" got {self.distance_transform!r}"
            )
        if not 0.0 < self.pagerank_damping < 1.0:
            raise ValidationError("pagerank_damping must lie in (0, 1)")
        for name in ("pagerank_tol", "eigen_tol", "tie_epsilon"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be positive")
        if self.eigen_max_iter < 1:
            raise ValidationError("eigen_max_iter must be at least 1")

    def to_dict(self) -> dict:
        return {
            "distance_transform": self.distance_transform,
            "pagerank_damping": self.pagerank_damping,
            "pagerank_tol": self.pagerank_tol,
            "eigen_tol": self.eigen_tol,
            "eigen_max_iter": self.eigen_max_iter,
            "tie_epsilon": self.tie_epsilon,
            "degree_weighted": self.degree_weighted,
        }


@dataclass(frozen=True)
class CentralityTable:
    contributors: list[str]
    degree: dict[str, float]
    closeness: dict[str, float]
    betweenness: dict[str, float]
    eigenvector: dict[str, float]
    pagerank: dict[str, float]
    config: CentralityConfig | None = None

    def measure(self, name: str) -> dict[str, float]:
        if name not in MEASURES:
            raise ValidationError(f"unknown centrality measure {name!r}")
        return getattr(self, name)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(CSV_HEADER)
        for v in self.contributors:
            writer.writerow(
                [v] + [repr(self.measure(m)[v]) for m in MEASURES]
            )
        return buf.getvalue()


def centrality_table_from_csv(data: bytes | str) -> CentralityTable:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration as exc:
        raise ValidationError("centrality csv input is empty") from exc
    if header != CSV_HEADER:
        raise ValidationError(f"unexpected centrality csv header: {header}")
    columns: dict[str, dict[str, float]] = {m: {} for m in MEASURES}
    contributors = []
    for row in reader:
        if not row:
            continue
        if len(row) != len(CSV_HEADER):
            raise ValidationError(f"centrality csv row has {len(row)} fields")
        contributors.append(row[0])
        for m, value in zip(MEASURES, row[1:]):
            columns[m][row[0]] = float(value)
    return CentralityTable(contributors=contributors, config=None, **columns)


def _edge_distance(total: int, cfg: CentralityConfig) -> float:
    if total <= 0:
        raise ValidationError("edge weights must be positive")
    return 1.0 / total if cfg.distance_transform == "inverse" else float(total)


def _distance_map(
    net: DeveloperNetwork, cfg: CentralityConfig
) -> Callable[[str, str], float]:
    cache: dict[str, dict[str, float]] = {}
    for v in net.vertices():
        cache[v] = {
            u: _edge_distance(w.total, cfg)
            for u, w in net.neighbor_weights(v).items()
        }
    return lambda v, u: cache[v][u]


def degree_centrality(
    net: DeveloperNetwork, cfg: CentralityConfig | None = None
) -> dict[str, float]:
    """Degree (or summed strength, behind the config flag) over n-1."""
    cfg = cfg or CentralityConfig()
    n = net.vertex_count
    if n < 2:
        raise ValidationError("degree centrality needs at least 2 vertices")
    if cfg.degree_weighted:
        return {v: net.strength(v) / (n - 1) for v in net.vertices()}
    return {v: net.degree(v) / (n - 1) for v in net.vertices()}


def _dijkstra(
    net: DeveloperNetwork, source: str, distance: Callable[[str, str], float]
) -> dict[str, float]:
    dist: dict[str, float] = {}
    heap = [(0.0, source)]
    while heap:
        d, v = heapq.heappop(heap)
        if v in dist:
            continue
        dist[v] = d
        for u in net.neighbors(v):
            if u not in dist:
                heapq.heappush(heap, (d + distance(v, u), u))
    return dist


def closeness_centrality(
    net: DeveloperNetwork, cfg: CentralityConfig | None = None
) -> dict[str, float]:
    """Component-size-corrected closeness over weighted shortest paths.

    With r others reachable from v at summed distance D, closeness is
    (r / (n-1)) * (r / D); the leading factor keeps values comparable
    across components of a disconnected network. Isolated vertices get 0.
    """
    cfg = cfg or CentralityConfig()
    n = net.vertex_count
    if n < 2:
        raise ValidationError("closeness centrality needs at least 2 vertices")
    distance = _distance_map(net, cfg)
    out: dict[str, float] = {}
    for v in net.vertices():
        dist = _dijkstra(net, v, distance)
        reachable = len(dist) - 1
        total = sum(dist.values())
        if reachable == 0 or total == 0.0:
            out[v] = 0.0
        else:
            out[v] = (reachable / (n - 1)) * (reachable / total)
    return out


def betweenness_centrality(
    net: DeveloperNetwork, cfg: CentralityConfig | None = None
) -> dict[str, float]:
    """Shortest-path betweenness via Brandes accumulation on weighted paths.

    Path-length ties are detected with a relative epsilon so that equal-cost
    paths whose floating-point sums differ only by rounding are counted as
    the same length. Normalized by 2/((n-1)(n-2)).
    """
    cfg = cfg or CentralityConfig()
    n = net.vertex_count
    if n < 3:
        raise ValidationError("betweenness centrality needs at least 3 vertices")
    distance = _distance_map(net, cfg)
    eps = cfg.tie_epsilon
    score = {v: 0.0 for v in net.vertices()}
    for source in net.vertices():
        stack: list[str] = []
        preds: dict[str, list[str]] = {source: []}
        sigma: dict[str, float] = {source: 1.0}
        dist: dict[str, float] = {}
        seen: dict[str, float] = {source: 0.0}
        heap = [(0.0, source)]
        while heap:
            d, v = heapq.heappop(heap)
            if v in dist:
                continue
            dist[v] = d
            stack.append(v)
            for u in net.neighbors(v):
                if u in dist:
                    continue
                alt = d + distance(v, u)
                if u not in seen:
                    seen[u] = alt
                    sigma[u] = sigma[v]
                    preds[u] = [v]
                    heapq.heappush(heap, (alt, u))
                else:
                    tol = eps * max(alt, seen[u])
                    if alt < seen[u] - tol:
                        seen[u] = alt
                        sigma[u] = sigma[v]
                        preds[u] = [v]
                        heapq.heappush(heap, (alt, u))
                    elif abs(alt - seen[u]) <= tol:
                        sigma[u] += sigma[v]
                        preds[u].append(v)
        delta = {v: 0.0 for v in stack}
        while stack:
            w = stack.pop()
            for v in preds[w]:
                delta[v] += (sigma[v] / sigma[w]) * (1.0 + delta[w])
            if w != source:
                score[w] += delta[w]
    norm = 1.0 / ((n - 1) * (n - 2))
    return {v: s * norm for v, s in score.items()}


def eigenvector_centrality(
    net: DeveloperNetwork, cfg: CentralityConfig | None = None
) -> dict[str, float]:
    """Principal eigenvector of the weighted adjacency by power iteration.

    Iterates x <- (A + I) x with Euclidean normalization each step; the
    identity shift keeps the iteration convergent on bipartite graphs while
    leaving the dominant eigenvector unchanged. Converged when no entry
    moves by more than eigen_tol.
    """
    cfg = cfg or CentralityConfig()
    if net.edge_count == 0:
        raise ValidationError("eigenvector centrality needs at least one edge")
    vertices = net.vertices()
    n = len(vertices)
    index = {v: i for i, v in enumerate(vertices)}
    rows: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for a, b, w in net.edges():
        ia, ib = index[a], index[b]
        rows[ia].append((ib, float(w.total)))
        rows[ib].append((ia, float(w.total)))
    x = [1.0 / math.sqrt(n)] * n
    for _ in range(cfg.eigen_max_iter):
        y = list(x)
        for i in range(n):
            for j, w in rows[i]:
                y[i] += w * x[j]
        norm = math.sqrt(sum(value * value for value in y))
        y = [value / norm for value in y]
        if max(abs(a - b) for a, b in zip(x, y)) < cfg.eigen_tol:
            return {v: y[index[v]] for v in vertices}
        x = y
    raise ConvergenceError(
        f"eigenvector power iteration did not converge in"
        f" {cfg.eigen_max_iter} iterations"
    )


def pagerank(
    net: DeveloperNetwork, cfg: CentralityConfig | None = None
) -> dict[str, float]:
    """PageRank with transition probability proportional to edge totals.

    Isolated vertices have no outgoing mass and redistribute uniformly.
    Iterates until the L1 change drops below pagerank_tol; the result sums
    to 1.
    """
    cfg = cfg or CentralityConfig()
    vertices = net.vertices()
    n = len(vertices)
    if n == 0:
        return {}
    d = cfg.pagerank_damping
    index = {v: i for i, v in enumerate(vertices)}
    out_share: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    dangling: list[int] = []
    for v in vertices:
        i = index[v]
        strength = net.strength(v)
        if strength == 0:
            dangling.append(i)
            continue
        for u, w in sorted(net.neighbor_weights(v).items()):
            out_share[i].append((index[u], w.total / strength))
    x = [1.0 / n] * n
    base = (1.0 - d) / n
    # Contraction by the damping factor guarantees geometric convergence;
    # the iteration cap is purely defensive.
    for _ in range(1000000):
        nxt = [base] * n
        dangling_mass = sum(x[i] for i in dangling) / n
        for i in range(n):
            share = x[i]
            for j, p in out_share[i]:
                nxt[j] += d * share * p
        if dangling:
            for j in range(n):
                nxt[j] += d * dangling_mass
        change = sum(abs(a - b) for a, b in zip(nxt, x))
        x = nxt
        if change < cfg.pagerank_tol:
            break
    return {v: x[index[v]] for v in vertices}


def centrality_table(
    net: DeveloperNetwork, cfg: CentralityConfig | None = None
) -> CentralityTable:
    """All five measures for every contributor; deterministic given inputs."""
    cfg = cfg or CentralityConfig()
    return CentralityTable(
        contributors=net.vertices(),
        degree=degree_centrality(net, cfg),
        closeness=closeness_centrality(net, cfg),
        betweenness=betweenness_centrality(net, cfg),
        eigenvector=eigenvector_centrality(net, cfg),
        pagerank=pagerank(net, cfg),
        config=cfg,
    )
