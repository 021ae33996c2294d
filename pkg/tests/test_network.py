"""Collaboration network construction, counting rules, and exports."""

import json
import random
from datetime import datetime, timedelta, timezone

import pytest

from devrep.errors import ValidationError
from devrep.events import CommitEvent, EventLog, RejectedPrEvent, parse_event_log
from devrep.network import (
    DeveloperNetwork,
    EdgeWeights,
    build_network,
    coedition_events,
    export_graph,
    parse_edge_csv,
    parse_graphml,
    review_events,
)

UTC = timezone.utc
DAY0 = datetime(2021, 3, 1, tzinfo=UTC)


def commit(sha, author, day, files=("f.rs",), merged_by=None, approvals=()):
    return CommitEvent(
        sha=sha,
        repo="org/widget",
        author=author,
        timestamp=DAY0 + timedelta(days=day),
        files=frozenset(files),
        merged_by=merged_by,
        approvals=frozenset(approvals),
    )


def log_of(*commits, rejected=()):
    return EventLog(commits=list(commits), rejected_prs=list(rejected))


class TestEdgeWeights:
    def test_total(self):
        assert EdgeWeights(coedit=1, review=2).total == 3

    def test_zero_edge_rejected(self):
        with pytest.raises(ValidationError):
            EdgeWeights(coedit=0, review=0)


class TestCoedition:
    def test_within_window(self):
        counts = coedition_events(
            log_of(commit("a", "alice", 0), commit("b", "bob", 10))
        )
        assert counts == {("alice", "bob"): 1}

    def test_window_exceeded(self):
        counts = coedition_events(
            log_of(commit("a", "alice", 0), commit("b", "carol", 50))
        )
        assert counts == {}

    def test_exact_boundary_included(self):
        counts = coedition_events(
            log_of(commit("a", "alice", 0), commit("b", "bob", 30))
        )
        assert counts == {("alice", "bob"): 1}

    def test_commit_pairs_counted_individually(self):
        counts = coedition_events(
            log_of(
                commit("a1", "alice", 0),
                commit("a2", "alice", 5),
                commit("b", "bob", 3),
            )
        )
        assert counts == {("alice", "bob"): 2}

    def test_per_file_counting(self):
        counts = coedition_events(
            log_of(
                commit("a", "alice", 0, files=("x.rs", "y.rs")),
                commit("b", "bob", 1, files=("x.rs", "y.rs")),
            )
        )
        assert counts == {("alice", "bob"): 2}

    def test_same_author_never_pairs(self):
        counts = coedition_events(
            log_of(commit("a1", "alice", 0), commit("a2", "alice", 1))
        )
        assert counts == {}


class TestReviewEvents:
    def test_approval(self):
        counts = review_events(log_of(commit("a", "alice", 0, approvals={"bob"})))
        assert counts == {("alice", "bob"): 1}

    def test_merger_approver_dedup(self):
        counts = review_events(
            log_of(commit("a", "alice", 0, approvals={"bob"}, merged_by="bob"))
        )
        assert counts == {("alice", "bob"): 1}

    def test_merger_distinct_from_approver(self):
        counts = review_events(
            log_of(commit("a", "alice", 0, approvals={"bob"}, merged_by="carol"))
        )
        assert counts == {("alice", "bob"): 1, ("alice", "carol"): 1}

    def test_rejected_pr(self):
        rejected = RejectedPrEvent(
            pr_number=9,
            repo="org/widget",
            author="alice",
            closer_or_reviewer="carol",
            timestamp=DAY0,
        )
        counts = review_events(log_of(rejected=[rejected]))
        assert counts == {("alice", "carol"): 1}


class TestBuildNetwork:
    def test_single_author_isolated(self):
        net = build_network(log_of(commit("a", "alice", 0)))
        assert net.vertices() == ["alice"]
        assert net.edge_count == 0

    def test_empty_log(self):
        net = build_network(log_of())
        assert net.vertex_count == 0
        assert net.edge_count == 0

    def test_coedit_and_review_combine(self):
        net = build_network(
            log_of(
                commit("a", "alice", 0),
                commit("b", "bob", 1, merged_by=None, approvals=()),
                commit("c", "alice", 2, files=("other.rs",), approvals={"bob"}),
            )
        )
        weights = net.edge("alice", "bob")
        assert weights == EdgeWeights(coedit=1, review=1)
        assert weights.total == 2

    def test_fixture_hand_traced_edges(self, small_network):
        expected = {
            ("alice", "bob"): EdgeWeights(coedit=1, review=2),
            ("alice", "carol"): EdgeWeights(coedit=1, review=0),
            ("alice", "erin"): EdgeWeights(coedit=1, review=0),
            ("bob", "carol"): EdgeWeights(coedit=1, review=0),
            ("carol", "dave"): EdgeWeights(coedit=0, review=1),
            ("erin", "frank"): EdgeWeights(coedit=0, review=1),
            ("carol", "henry"): EdgeWeights(coedit=0, review=1),
        }
        assert {(a, b): w for a, b, w in small_network.edges()} == expected
        assert small_network.vertices() == [
            "alice", "bob", "carol", "dave", "erin", "frank", "henry",
        ]

    def test_event_order_permutation_invariant(self, small_log):
        rng = random.Random(7)
        shuffled_commits = list(small_log.commits)
        rng.shuffle(shuffled_commits)
        shuffled = EventLog(
            commits=shuffled_commits, rejected_prs=list(small_log.rejected_prs)
        )
        assert build_network(shuffled) == build_network(small_log)

    def test_conservation(self, small_log, small_network):
        coedit_total = sum(coedition_events(small_log).values())
        review_total = sum(review_events(small_log).values())
        assert sum(w.coedit for _, _, w in small_network.edges()) == coedit_total
        assert sum(w.review for _, _, w in small_network.edges()) == review_total

    def test_time_shifted_duplicate_doubles_every_edge(self, small_log):
        """Appending a far-shifted copy of the log doubles each edge total."""
        shift = timedelta(days=3650)
        copy = EventLog(
            commits=[
                CommitEvent(
                    sha=c.sha + "-copy",
                    repo=c.repo,
                    author=c.author,
                    timestamp=c.timestamp + shift,
                    files=c.files,
                    pr_number=c.pr_number,
                    merged_by=c.merged_by,
                    approvals=c.approvals,
                )
                for c in small_log.commits
            ],
            rejected_prs=[
                RejectedPrEvent(
                    pr_number=r.pr_number + 1000,
                    repo=r.repo,
                    author=r.author,
                    closer_or_reviewer=r.closer_or_reviewer,
                    timestamp=r.timestamp + shift,
                )
                for r in small_log.rejected_prs
            ],
        )
        doubled_log = EventLog(
            commits=small_log.commits + copy.commits,
            rejected_prs=small_log.rejected_prs + copy.rejected_prs,
        )
        single = build_network(small_log)
        doubled = build_network(doubled_log)
        assert doubled.vertices() == single.vertices()
        for a, b, w in single.edges():
            again = doubled.edge(a, b)
            assert again.coedit == 2 * w.coedit
            assert again.review == 2 * w.review


class TestExports:
    def test_empty_network_edge_csv(self):
        data = export_graph(DeveloperNetwork([], {}), "edge-csv")
        assert data.decode().splitlines() == ["a,b,total,coedit,review"]

    def test_single_edge_row(self):
        net = DeveloperNetwork(
            ["alice", "bob"], {("alice", "bob"): EdgeWeights(coedit=1, review=1)}
        )
        lines = export_graph(net, "edge-csv").decode().splitlines()
        assert lines[1] == "alice,bob,2,1,1"

    def test_edge_csv_round_trip(self, small_network):
        data = export_graph(small_network, "edge-csv")
        assert parse_edge_csv(data) == small_network

    def test_graphml_round_trip(self, small_network):
        data = export_graph(small_network, "graphml")
        assert parse_graphml(data) == small_network

    def test_graphml_preserves_isolated_vertices(self):
        net = DeveloperNetwork(["loner"], {})
        assert parse_graphml(export_graph(net, "graphml")) == net

    def test_dot_contains_edges(self, small_network):
        text = export_graph(small_network, "dot").decode()
        assert '"alice" -- "bob" [weight=3, coedit=1, review=2];' in text

    def test_unknown_format(self, small_network):
        with pytest.raises(ValidationError):
            export_graph(small_network, "gexf")

    def test_exports_byte_stable(self, small_log, small_network):
        rebuilt = build_network(small_log)
        for fmt in ("graphml", "dot", "edge-csv"):
            assert export_graph(small_network, fmt) == export_graph(rebuilt, fmt)
