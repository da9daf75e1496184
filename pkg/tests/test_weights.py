import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import make_graph
from aggdiff import kernels
from aggdiff.weights import (apply_scheme, edge_power, jaccard_weight,
                             neighborhood_csr, power_score, weighted_overlap)

# topology reproducing the worked overlap example: C and D are connected,
# share exactly one neighbor, and have five distinct nodes in their union
C, D, X, B, E = 0, 1, 2, 3, 4
FIG_EDGES = [(C, D), (C, X), (C, B), (D, X), (D, E)]


class TestJaccard:
    def test_worked_example_one_fifth(self):
        g = make_graph(FIG_EDGES)
        assert jaccard_weight(g, C, D) == pytest.approx(1.0 / 5.0)

    def test_identical_neighborhoods_give_one(self):
        # kernel-level degenerate case: two rows with the same neighbor set
        indptr = np.array([0, 2, 4], dtype=np.int64)
        indices = np.array([2, 3, 2, 3], dtype=np.int64)
        out = np.zeros(1, dtype=np.int64)
        kernels.sorted_intersection_counts(indptr, indices,
                                           np.array([0], dtype=np.int64),
                                           np.array([1], dtype=np.int64), out)
        inter = out[0]
        union = 2 + 2 - inter
        assert inter / union == 1.0

    def test_matches_set_oracle(self, rng):
        for _ in range(20):
            edges = oracles.random_digraph(rng, 8, 0.3)
            if not edges:
                continue
            g = make_graph(edges, 8)
            for u, v in edges:
                assert jaccard_weight(g, u, v) == pytest.approx(
                    oracles.jaccard_by_sets(8, edges, u, v))

    def test_absent_edge_errors(self):
        g = make_graph([(0, 1), (1, 2), (2, 0)])
        with pytest.raises(ValueError):
            jaccard_weight(g, 0, 2)

    def test_symmetry_on_reciprocal_edges(self, rng):
        edges = oracles.random_digraph(rng, 10, 0.4)
        recip = {(u, v) for u, v in edges if (v, u) in set(edges)}
        g = make_graph(edges, 10)
        for u, v in recip:
            assert jaccard_weight(g, u, v) == jaccard_weight(g, v, u)


class TestPowerScore:
    def test_balanced_node(self):
        g = make_graph([(0, 1), (0, 2), (0, 3), (1, 0), (2, 0), (3, 0)])
        assert power_score(g, 0) == 1.0

    def test_in_one_out_four(self):
        edges = [(0, 1), (0, 2), (0, 3), (0, 4), (1, 0)]
        g = make_graph(edges)
        assert power_score(g, 0) == 0.25

    def test_sink_gets_infinity(self):
        g = make_graph([(0, 1)])
        assert np.isinf(power_score(g, 1))

    def test_finite_on_scc(self, rng):
        edges = oracles.random_digraph(rng, 10, 0.2, ensure_cycle=True)
        g = make_graph(edges, 10)
        for v in range(10):
            assert np.isfinite(power_score(g, v))


class TestEdgePower:
    def test_direct_ratio(self):
        # P_0 = 1 (one in, one out... built so), P_1 = 0.5
        edges = [(0, 1), (1, 0), (1, 2), (2, 1)]
        g = make_graph(edges)
        # P_1 = in 2 / out 2 = 1; P_2 = 1/1 = 1 -> ratio 1
        assert edge_power(g, 1, 2) == 1.0

    def test_clamped_to_one(self):
        # u: in 1 out 2 -> P_u = 0.5 ; v: in 2 out 1 -> P_v = 2 ; ratio 4 -> clamp
        edges = [(0, 1), (0, 2), (1, 0), (2, 1)]
        g = make_graph(edges)
        assert power_score(g, 0) == 0.5
        assert power_score(g, 1) == 2.0
        assert edge_power(g, 0, 1) == 1.0

    def test_unclamped_value(self):
        # u: in 2 out 1 -> P_u = 2 ; v: in 1 out 1 -> P_v = 1 -> ratio 0.5
        edges = [(0, 1), (1, 2), (2, 0), (3, 0)]
        g = make_graph(edges)
        assert power_score(g, 0) == 2.0
        assert power_score(g, 1) == 1.0
        assert edge_power(g, 0, 1) == 0.5

    def test_zero_or_infinite_source_power(self, caplog):
        # node 0 has no in-edges: P_0 = 0 -> weight 0 with warning
        g = make_graph([(0, 1), (1, 2), (2, 1)])
        assert edge_power(g, 0, 1) == 0.0
        assert any("weight set to 0" in r.message for r in caplog.records)

    def test_raw_ratio_antisymmetry(self, rng):
        edges = oracles.random_digraph(rng, 10, 0.3, ensure_cycle=True)
        g = make_graph(edges, 10)
        for v in range(10):
            p = power_score(g, v)
            assert np.isfinite(p) and p > 0
        for u, v in edges:
            ratio = power_score(g, v) / power_score(g, u)
            back = power_score(g, u) / power_score(g, v)
            assert ratio * back == pytest.approx(1.0)


class TestWeightedOverlap:
    def test_product(self, rng):
        edges = oracles.random_digraph(rng, 9, 0.3, ensure_cycle=True)
        g = make_graph(edges, 9)
        for u, v in edges:
            assert weighted_overlap(g, u, v) == pytest.approx(
                edge_power(g, u, v) * jaccard_weight(g, u, v))

    def test_zero_factor_zero(self):
        g = make_graph([(0, 1), (1, 2), (2, 3), (3, 0)])  # 4-cycle: jaccard 0
        assert weighted_overlap(g, 0, 1) == 0.0


class TestApplyScheme:
    def test_fig_topology_edge_weight(self):
        g = make_graph(FIG_EDGES)
        wg = apply_scheme(g, "jaccard")
        assert wg.edge_weight(C, D) == pytest.approx(1.0 / 5.0)

    def test_deterministic(self, rng):
        edges = oracles.random_digraph(rng, 12, 0.25, ensure_cycle=True)
        g = make_graph(edges, 12)
        for scheme in ("jaccard", "power", "weighted"):
            w1 = apply_scheme(g, scheme).w
            w2 = apply_scheme(g, scheme).w
            assert np.array_equal(w1, w2)

    def test_random_scheme_seeded(self, rng):
        edges = oracles.random_digraph(rng, 8, 0.3, ensure_cycle=True)
        g = make_graph(edges, 8)
        assert np.array_equal(apply_scheme(g, "random", rng_seed=5).w,
                              apply_scheme(g, "random", rng_seed=5).w)
        assert not np.array_equal(apply_scheme(g, "random", rng_seed=5).w,
                                  apply_scheme(g, "random", rng_seed=6).w)

    def test_batch_equals_per_edge_ops(self, rng):
        edges = oracles.random_digraph(rng, 10, 0.3, ensure_cycle=True)
        g = make_graph(edges, 10)
        for scheme, fn in (("jaccard", jaccard_weight),
                           ("power", edge_power),
                           ("weighted", weighted_overlap)):
            wg = apply_scheme(g, scheme)
            for u, v in edges:
                assert wg.edge_weight(u, v) == pytest.approx(fn(g, u, v))

    @given(st.integers(0, 2**31 - 1))
    @settings(max_examples=25, deadline=None)
    def test_all_weights_in_unit_interval(self, seed):
        r = np.random.default_rng(seed)
        edges = oracles.random_digraph(r, 9, 0.3)
        if not edges:
            return
        g = make_graph(edges, 9)
        for scheme in ("jaccard", "power", "weighted", "random"):
            w = apply_scheme(g, scheme, rng_seed=seed).w
            assert np.all(w >= 0.0) and np.all(w <= 1.0)

    def test_w_in_alignment(self, rng):
        edges = oracles.random_digraph(rng, 10, 0.3, ensure_cycle=True)
        g = make_graph(edges, 10)
        wg = apply_scheme(g, "jaccard")
        for v in range(10):
            lo, hi = g.in_indptr[v], g.in_indptr[v + 1]
            for pos in range(lo, hi):
                u = g.in_indices[pos]
                assert wg.w_in[pos] == wg.edge_weight(u, v)

    def test_unknown_scheme_rejected(self):
        g = make_graph([(0, 1), (1, 0)])
        with pytest.raises(ValueError):
            apply_scheme(g, "bogus")


def test_neighborhood_csr_sorted_and_complete(rng):
    edges = oracles.random_digraph(rng, 12, 0.25)
    g = make_graph(edges, 12)
    indptr, indices = neighborhood_csr(g)
    nbrs = [set() for _ in range(12)]
    for a, b in edges:
        nbrs[a].add(b)
        nbrs[b].add(a)
    for v in range(12):
        row = indices[indptr[v]:indptr[v + 1]]
        assert list(row) == sorted(nbrs[v] - {v})
