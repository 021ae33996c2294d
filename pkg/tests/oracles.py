"""Independent brute-force reference implementations for centrality checks.

Deliberately naive: exhaustive simple-path enumeration in exact rational
arithmetic for the shortest-path measures, dense eigendecomposition for
eigenvector centrality, and a dense linear solve for PageRank. These share
no code with the package implementations they validate.
"""

from fractions import Fraction
from itertools import combinations

import numpy as np

from devrep.network import DeveloperNetwork, EdgeWeights


def random_connected_network(rng, n, weight_max=5, extra_edges=None):
    """Random connected graph: a random spanning tree plus extra edges."""
    names = [f"v{i}" for i in range(n)]
    edges = {}

    def add(i, j):
        a, b = sorted((names[i], names[j]))
        total = int(rng.integers(1, weight_max + 1))
        coedit = int(rng.integers(0, total + 1))
        edges[(a, b)] = EdgeWeights(coedit=coedit, review=total - coedit)

    for i in range(1, n):
        add(i, int(rng.integers(0, i)))
    if extra_edges is None:
        extra_edges = int(rng.integers(0, n))
    for _ in range(extra_edges):
        i, j = rng.choice(n, size=2, replace=False)
        a, b = sorted((names[int(i)], names[int(j)]))
        if (a, b) not in edges:
            add(int(i), int(j))
    return DeveloperNetwork(names, edges)


def _exact_distance(weight_total, transform):
    if transform == "inverse":
        return Fraction(1, weight_total)
    return Fraction(weight_total)


def enumerate_simple_paths(net, source, target, transform):
    """All simple paths source -> target with exact rational lengths."""
    paths = []

    def walk(v, visited, length, trail):
        if v == target:
            paths.append((length, list(trail)))
            return
        for u in net.neighbors(v):
            if u in visited:
                continue
            w = net.edge(v, u)
            visited.add(u)
            trail.append(u)
            walk(u, visited, length + _exact_distance(w.total, transform), trail)
            trail.pop()
            visited.remove(u)

    walk(source, {source}, Fraction(0), [source])
    return paths


def shortest_paths_exact(net, source, target, transform):
    """The exact shortest distance and the list of minimal paths."""
    paths = enumerate_simple_paths(net, source, target, transform)
    if not paths:
        return None, []
    best = min(length for length, _ in paths)
    return best, [trail for length, trail in paths if length == best]


def brute_degree(net, weighted=False):
    n = net.vertex_count
    if weighted:
        return {v: net.strength(v) / (n - 1) for v in net.vertices()}
    return {v: net.degree(v) / (n - 1) for v in net.vertices()}


def brute_closeness(net, transform="inverse"):
    n = net.vertex_count
    out = {}
    for v in net.vertices():
        total = Fraction(0)
        reachable = 0
        for u in net.vertices():
            if u == v:
                continue
            best, _ = shortest_paths_exact(net, v, u, transform)
            if best is not None:
                total += best
                reachable += 1
        if reachable == 0:
            out[v] = 0.0
        else:
            out[v] = float(
                Fraction(reachable, n - 1) * reachable / total
            )
    return out


def brute_betweenness(net, transform="inverse"):
    vertices = net.vertices()
    n = len(vertices)
    score = {v: Fraction(0) for v in vertices}
    for s, t in combinations(vertices, 2):
        _, minimal = shortest_paths_exact(net, s, t, transform)
        if not minimal:
            continue
        count = len(minimal)
        for trail in minimal:
            for v in trail[1:-1]:
                score[v] += Fraction(1, count)
    norm = Fraction(2, (n - 1) * (n - 2))
    return {v: float(s * norm) for v, s in score.items()}


def dense_adjacency(net):
    vertices = net.vertices()
    index = {v: i for i, v in enumerate(vertices)}
    a = np.zeros((len(vertices), len(vertices)))
    for u, v, w in net.edges():
        a[index[u], index[v]] = w.total
        a[index[v], index[u]] = w.total
    return vertices, a


def brute_eigenvector(net):
    vertices, a = dense_adjacency(net)
    eigenvalues, eigenvectors = np.linalg.eigh(a)
    principal = eigenvectors[:, int(np.argmax(eigenvalues))]
    if principal.sum() < 0:
        principal = -principal
    return dict(zip(vertices, principal))


def dense_reml_criterion(y, X, groups, theta):
    """REML criterion from explicit dense covariance matrices.

    Mirrors the documented criterion definition (including the log det X'X
    correction) but goes through full O x O matrices instead of the
    per-group rank-one updates used by the package.
    """
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    labels = sorted(set(groups))
    z = np.zeros((n, len(labels)))
    for row, g in enumerate(groups):
        z[row, labels.index(g)] = 1.0
    v0 = np.eye(n) + theta * z @ z.T
    chol = np.linalg.cholesky(v0)
    logdet_v0 = 2.0 * float(np.sum(np.log(np.diag(chol))))
    half_x = np.linalg.solve(chol, X)
    half_y = np.linalg.solve(chol, y)
    xtvx = half_x.T @ half_x
    beta = np.linalg.solve(xtvx, half_x.T @ half_y)
    half_resid = half_y - half_x @ beta
    sigma2 = float(half_resid @ half_resid) / (n - p)
    _, logdet_xtvx = np.linalg.slogdet(xtvx)
    _, logdet_xtx = np.linalg.slogdet(X.T @ X)
    return (
        (n - p) * np.log(sigma2)
        + logdet_v0
        + logdet_xtvx
        - logdet_xtx
        + (n - p) * (1.0 + np.log(2.0 * np.pi))
    )


def balanced_anova_moments(y, groups):
    """Method-of-moments variance components for a balanced one-way layout."""
    y = np.asarray(y, dtype=float)
    labels = sorted(set(groups))
    per_group = [y[[i for i, g in enumerate(groups) if g == label]]
                 for label in labels]
    sizes = {len(vals) for vals in per_group}
    assert len(sizes) == 1, "layout must be balanced"
    n = sizes.pop()
    g = len(labels)
    group_means = np.array([vals.mean() for vals in per_group])
    msw = sum(float(((vals - vals.mean()) ** 2).sum()) for vals in per_group) / (
        len(y) - g
    )
    msb = n * float(((group_means - y.mean()) ** 2).sum()) / (g - 1)
    return msw, (msb - msw) / n


def brute_pagerank(net, damping=0.85):
    vertices, a = dense_adjacency(net)
    n = len(vertices)
    strengths = a.sum(axis=1)
    m = np.zeros_like(a)
    for i in range(n):
        if strengths[i] == 0:
            m[i, :] = 1.0 / n
        else:
            m[i, :] = a[i, :] / strengths[i]
    x = np.linalg.solve(
        np.eye(n) - damping * m.T, np.full(n, (1.0 - damping) / n)
    )
    return dict(zip(vertices, x))
