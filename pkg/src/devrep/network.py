"""Undirected, weighted developer collaboration network.

Two collaboration rules produce edges: two contributors editing the same
file within a bounded time window (co-edition), and one contributor
reviewing another's change via approval, merge, or rejected-PR close
(author-reviewer). Edge weights carry both counts; the total is the
number of collaborations between the pair.
"""

from __future__ import annotations

import csv
import io
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping
from xml.etree import ElementTree
from xml.sax.saxutils import escape, quoteattr

from .errors import ValidationError
from .events import EventLog, is_bot_login

SECONDS_PER_DAY = 86400

Pair = tuple[str, str]


def ordered_pair(a: str, b: str) -> Pair:
    """Canonical unordered pair key: lexicographically sorted endpoints."""
    if a == b:
        raise ValidationError(f"self-pair not allowed: {a!r}")
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class EdgeWeights:
    coedit: int
    review: int

    def __post_init__(self) -> None:
        if self.coedit < 0 or self.review < 0:
            raise ValidationError("edge counts must be non-negative")
        if self.coedit + self.review < 1:
            raise ValidationError("edge must carry at least one collaboration")

    @property
    def total(self) -> int:
        return self.coedit + self.review


class DeveloperNetwork:
    """Immutable undirected weighted graph of contributors.

    Edge keys are canonical (a < b) unordered pairs; isolated vertices are
    permitted. All iteration orders are lexicographic so downstream output
    is deterministic.
    """

    def __init__(
        self, vertices: Iterable[str], edges: Mapping[Pair, EdgeWeights]
    ) -> None:
        self._vertices = frozenset(vertices)
        canonical: dict[Pair, EdgeWeights] = {}
        adjacency: dict[str, dict[str, EdgeWeights]] = {
            v: {} for v in self._vertices
        }
        for (a, b), w in edges.items():
            key = ordered_pair(a, b)
            if key in canonical:
                raise ValidationError(f"duplicate edge {key}")
            if a not in self._vertices or b not in self._vertices:
                raise ValidationError(f"edge {key} has endpoint outside vertex set")
            canonical[key] = w
            adjacency[a][b] = w
            adjacency[b][a] = w
        self._edges = canonical
        self._adjacency = adjacency
        self._sorted_vertices = sorted(self._vertices)

    @property
    def vertex_count(self) -> int:
        return len(self._vertices)

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    def vertices(self) -> list[str]:
        return list(self._sorted_vertices)

    def has_vertex(self, v: str) -> bool:
        return v in self._vertices

    def edges(self) -> Iterator[tuple[str, str, EdgeWeights]]:
        for a, b in sorted(self._edges):
            yield a, b, self._edges[(a, b)]

    def edge(self, a: str, b: str) -> EdgeWeights | None:
        return self._edges.get(ordered_pair(a, b))

    def neighbors(self, v: str) -> list[str]:
        return sorted(self._adjacency[v])

    def neighbor_weights(self, v: str) -> dict[str, EdgeWeights]:
        return self._adjacency[v]

    def degree(self, v: str) -> int:
        return len(self._adjacency[v])

    def strength(self, v: str) -> int:
        return sum(w.total for w in self._adjacency[v].values())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DeveloperNetwork):
            return NotImplemented
        return self._vertices == other._vertices and self._edges == other._edges

    def __repr__(self) -> str:
        return (
            f"DeveloperNetwork(vertices={self.vertex_count},"
            f" edges={self.edge_count})"
        )


def coedition_events(log: EventLog, window_days: int = 30) -> dict[Pair, int]:
    """Count co-edition collaborations per contributor pair.

    For each file, every unordered pair of commits by distinct authors whose
    timestamps lie within window_days of each other (inclusive) contributes
    one event to that author pair.
    """
    if window_days < 1:
        raise ValidationError("window_days must be at least 1")
    window_seconds = window_days * SECONDS_PER_DAY
    by_file: dict[str, list[tuple[float, str]]] = defaultdict(list)
    for c in log.commits:
        stamp = c.timestamp.timestamp()
        for f in c.files:
            by_file[f].append((stamp, c.author))
    counts: dict[Pair, int] = defaultdict(int)
    for touches in by_file.values():
        touches.sort()
        for i, (t_i, author_i) in enumerate(touches):
            for t_j, author_j in touches[i + 1 :]:
                if t_j - t_i > window_seconds:
                    break
                if author_i != author_j:
                    counts[ordered_pair(author_i, author_j)] += 1
    return dict(counts)


def review_events(log: EventLog) -> dict[Pair, int]:
    """Count author-reviewer collaborations per contributor pair.

    Per commit: one event per distinct approver other than the author, plus
    one for the merger when the merger differs from the author and is not
    already counted as an approver of that commit. Each rejected pull
    request contributes one event between its author and the closing or
    reviewing developer.
    """
    counts: dict[Pair, int] = defaultdict(int)
    for c in log.commits:
        approvers = {a for a in c.approvals if a != c.author}
        for reviewer in approvers:
            counts[ordered_pair(c.author, reviewer)] += 1
        if (
            c.merged_by is not None
            and c.merged_by != c.author
            and c.merged_by not in approvers
        ):
            counts[ordered_pair(c.author, c.merged_by)] += 1
    for r in log.rejected_prs:
        counts[ordered_pair(r.author, r.closer_or_reviewer)] += 1
    return dict(counts)


def build_network(log: EventLog, window_days: int = 30) -> DeveloperNetwork:
    """Construct the collaboration network from an event log.

    Vertices are all distinct non-bot authors and reviewers appearing in the
    log; an empty log yields an empty network. Deterministic for identical
    input regardless of event order.
    """
    vertices: set[str] = set()
    for c in log.commits:
        vertices.add(c.author)
        vertices.update(c.approvals)
        if c.merged_by is not None:
            vertices.add(c.merged_by)
    for r in log.rejected_prs:
        vertices.add(r.author)
        vertices.add(r.closer_or_reviewer)
    vertices = {v for v in vertices if not is_bot_login(v)}

    coedit = coedition_events(log, window_days)
    review = review_events(log)
    edges: dict[Pair, EdgeWeights] = {}
    for pair in set(coedit) | set(review):
        a, b = pair
        if is_bot_login(a) or is_bot_login(b):
            continue
        edges[pair] = EdgeWeights(
            coedit=coedit.get(pair, 0), review=review.get(pair, 0)
        )
    return DeveloperNetwork(vertices, edges)


EXPORT_FORMATS = ("graphml", "dot", "edge-csv")


def export_graph(net: DeveloperNetwork, format: str) -> bytes:
    """Serialize a network; output is byte-stable for identical networks."""
    if format == "graphml":
        return _to_graphml(net)
    if format == "dot":
        return _to_dot(net)
    if format == "edge-csv":
        return _to_edge_csv(net)
    raise ValidationError(
        f"unknown export format {format!r}; expected one of {EXPORT_FORMATS}"
    )


def _to_edge_csv(net: DeveloperNetwork) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["a", "b", "total", "coedit", "review"])
    for a, b, w in net.edges():
        writer.writerow([a, b, w.total, w.coedit, w.review])
    return buf.getvalue().encode("utf-8")


def _to_dot(net: DeveloperNetwork) -> bytes:
    lines = ["graph developer_network {"]
    for v in net.vertices():
        lines.append(f"  {_dot_quote(v)};")
    for a, b, w in net.edges():
        lines.append(
            f"  {_dot_quote(a)} -- {_dot_quote(b)}"
            f" [weight={w.total}, coedit={w.coedit}, review={w.review}];"
        )
    lines.append("}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def _dot_quote(name: str) -> str:
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _to_graphml(net: DeveloperNetwork) -> bytes:
    lines = [
        '<?xml version="1.0" encoding="utf-8"?>',
        '<graphml xmlns="http://graphml.graphdrawing.org/xmlns">',
        '  <key id="weight" for="edge" attr.name="weight" attr.type="long"/>',
        '  <key id="coedit" for="edge" attr.name="coedit" attr.type="long"/>',
        '  <key id="review" for="edge" attr.name="review" attr.type="long"/>',
        '  <graph edgedefault="undirected">',
    ]
    for v in net.vertices():
        lines.append(f"    <node id={quoteattr(v)}/>")
    for a, b, w in net.edges():
        lines.append(f"    <edge source={quoteattr(a)} target={quoteattr(b)}>")
        lines.append(f'      <data key="weight">{w.total}</data>')
        lines.append(f'      <data key="coedit">{w.coedit}</data>')
        lines.append(f'      <data key="review">{w.review}</data>')
        lines.append("    </edge>")
    lines.append("  </graph>")
    lines.append("</graphml>")
    return ("\n".join(lines) + "\n").encode("utf-8")


def parse_edge_csv(data: bytes | str) -> DeveloperNetwork:
    """Rebuild a network from edge-csv output.

    The edge list carries no isolated vertices, so the round trip is exact
    for networks whose every vertex has at least one edge.
    """
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration as exc:
        raise ValidationError("edge-csv input is empty") from exc
    if header != ["a", "b", "total", "coedit", "review"]:
        raise ValidationError(f"unexpected edge-csv header: {header}")
    vertices: set[str] = set()
    edges: dict[Pair, EdgeWeights] = {}
    for row in reader:
        if not row:
            continue
        if len(row) != 5:
            raise ValidationError(f"edge-csv row has {len(row)} fields: {row}")
        a, b, total, coedit, review = row
        weights = EdgeWeights(coedit=int(coedit), review=int(review))
        if weights.total != int(total):
            raise ValidationError(
                f"edge-csv row for ({a},{b}): total {total} != coedit+review"
            )
        vertices.update((a, b))
        edges[ordered_pair(a, b)] = weights
    return DeveloperNetwork(vertices, edges)


def parse_graphml(data: bytes | str) -> DeveloperNetwork:
    """Read a network back from GraphML produced by export_graph."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    try:
        root = ElementTree.fromstring(text)
    except ElementTree.ParseError as exc:
        raise ValidationError(f"invalid graphml: {exc}") from exc
    ns = {"g": "http://graphml.graphdrawing.org/xmlns"}
    graph = root.find("g:graph", ns)
    if graph is None:
        raise ValidationError("graphml input has no <graph> element")
    vertices: set[str] = set()
    edges: dict[Pair, EdgeWeights] = {}
    for node in graph.findall("g:node", ns):
        node_id = node.get("id")
        if node_id is None:
            raise ValidationError("graphml node without id")
        vertices.add(node_id)
    for edge in graph.findall("g:edge", ns):
        a, b = edge.get("source"), edge.get("target")
        if a is None or b is None:
            raise ValidationError("graphml edge without endpoints")
        values = {
            data.get("key"): data.text for data in edge.findall("g:data", ns)
        }
        try:
            coedit = int(values.get("coedit") or 0)
            review = int(values.get("review") or 0)
        except ValueError as exc:
            raise ValidationError(f"bad edge attributes on ({a},{b})") from exc
        edges[ordered_pair(a, b)] = EdgeWeights(coedit=coedit, review=review)
    return DeveloperNetwork(vertices, edges)
