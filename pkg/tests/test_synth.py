"""Synthetic network and response generators."""

import numpy as np
import pytest

from devrep.centrality import centrality_table
from devrep.errors import ValidationError
from devrep.graphstats import structural_summary
from devrep.lmm import fit_random_intercept
from devrep.synth import (
    SynthNetworkSpec,
    SynthResponseSpec,
    generate_network,
    synth_responses,
)


class TestGenerateNetwork:
    def test_ring_lattice_clustering(self):
        net = generate_network(SynthNetworkSpec(n=20, k=4, p_rewire=0.0, seed=0))
        assert structural_summary(net).avg_clustering == 0.5

    def test_deterministic(self):
        spec = SynthNetworkSpec(n=50, k=6, p_rewire=0.3, weight_max=4, seed=12)
        assert generate_network(spec) == generate_network(spec)

    def test_seeds_differ(self):
        a = generate_network(SynthNetworkSpec(n=50, k=6, p_rewire=0.3, seed=1))
        b = generate_network(SynthNetworkSpec(n=50, k=6, p_rewire=0.3, seed=2))
        assert a != b

    def test_rewired_keeps_higher_clustering_than_random(self):
        partial = generate_network(SynthNetworkSpec(n=200, k=6, p_rewire=0.1, seed=3))
        random_net = generate_network(SynthNetworkSpec(n=200, k=6, p_rewire=1.0, seed=3))
        assert (
            structural_summary(partial).avg_clustering
            > structural_summary(random_net).avg_clustering
        )

    def test_weight_bounds(self):
        net = generate_network(
            SynthNetworkSpec(n=30, k=4, p_rewire=0.2, weight_max=5, seed=4)
        )
        for _, _, w in net.edges():
            assert 1 <= w.total <= 5
            assert w.coedit >= 0 and w.review >= 0

    def test_odd_k_rejected(self):
        with pytest.raises(ValidationError):
            SynthNetworkSpec(n=10, k=3, p_rewire=0.0)

    def test_k_must_be_below_n(self):
        with pytest.raises(ValidationError):
            SynthNetworkSpec(n=4, k=4, p_rewire=0.0)


@pytest.fixture(scope="module")
def table():
    net = generate_network(
        SynthNetworkSpec(n=60, k=6, p_rewire=0.1, weight_max=5, seed=9)
    )
    return centrality_table(net)


class TestSynthResponses:
    def test_noiseless_limit(self, table):
        spec = SynthResponseSpec(
            true_beta={"intercept": 2.0, "closeness": 1.0, "pagerank": -0.5},
            sigma_alpha=0.0,
            sigma_eps=1e-12,
            responses_per_contributor=2,
            seed=0,
        )
        frame = synth_responses(None, table, spec)
        predicted = frame.X @ np.array([2.0, 1.0, -0.5])
        assert np.allclose(frame.y, predicted, atol=1e-9)

    def test_deterministic(self, table):
        spec = SynthResponseSpec(
            true_beta={"intercept": 2.0, "closeness": 1.0},
            sigma_alpha=0.5,
            sigma_eps=1.0,
            responses_per_contributor=3,
            seed=5,
        )
        a = synth_responses(None, table, spec)
        b = synth_responses(None, table, spec)
        assert np.array_equal(a.y, b.y)
        assert np.array_equal(a.X, b.X)
        assert a.groups == b.groups

    def test_clamped_mode_range(self, table):
        spec = SynthResponseSpec(
            true_beta={"intercept": 2.5, "closeness": 2.0},
            sigma_alpha=1.0,
            sigma_eps=2.0,
            responses_per_contributor=4,
            rounding="clamped_1_4",
            seed=6,
        )
        frame = synth_responses(None, table, spec)
        assert set(np.unique(frame.y)) <= {1.0, 2.0, 3.0, 4.0}

    def test_recovery_smoke(self, table):
        spec = SynthResponseSpec(
            true_beta={"intercept": 1.0, "closeness": -0.5},
            sigma_alpha=0.5,
            sigma_eps=1.0,
            responses_per_contributor=5,
            seed=42,
        )
        frame = synth_responses(None, table, spec)
        fit = fit_random_intercept(frame)
        assert abs(fit.coefficient("intercept") - 1.0) <= 3 * fit.se[0]
        assert abs(fit.coefficient("closeness") + 0.5) <= 3 * fit.se[1]

    def test_requires_intercept_key(self):
        with pytest.raises(ValidationError):
            SynthResponseSpec(true_beta={"closeness": 1.0}, sigma_alpha=0, sigma_eps=1)
