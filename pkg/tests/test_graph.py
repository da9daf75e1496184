import numpy as np
import pytest

import oracles
from conftest import make_graph
from aggdiff.graph import (AggressionState, DataFormatError, largest_scc,
                           load_edge_list, load_labels, load_scores,
                           write_edge_list)


def write(tmp_path, text, name="edges.txt"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestLoadEdgeList:
    def test_single_edge(self, tmp_path):
        g = load_edge_list(write(tmp_path, "0 1\n"))
        assert g.n_nodes == 2
        assert g.edge_count == 1

    def test_dedup_and_self_loop(self, tmp_path, caplog):
        g = load_edge_list(write(tmp_path, "0 1\n0 1\n2 2\n"))
        assert g.n_nodes == 2
        assert g.edge_count == 1
        assert any("self-loop" in r.message for r in caplog.records)

    def test_comments_and_whitespace(self, tmp_path):
        g = load_edge_list(write(tmp_path, "# header\n\n10 20\n20  30\n"))
        assert g.n_nodes == 3
        assert list(g.orig_ids) == [10, 20, 30]

    def test_malformed_line_reports_number(self, tmp_path):
        p = write(tmp_path, "0 1\n1 2 3\n")
        with pytest.raises(DataFormatError, match=":2"):
            load_edge_list(p)

    def test_non_integer_reports_number(self, tmp_path):
        p = write(tmp_path, "0 1\nfoo 2\n")
        with pytest.raises(DataFormatError, match=":2"):
            load_edge_list(p)

    def test_empty_file(self, tmp_path):
        with pytest.raises(DataFormatError):
            load_edge_list(write(tmp_path, "# nothing\n"))

    def test_negative_id_rejected(self, tmp_path):
        with pytest.raises(DataFormatError):
            load_edge_list(write(tmp_path, "-1 2\n"))

    def test_adjacency_consistency(self, tmp_path, rng):
        edges = oracles.random_digraph(rng, 12, 0.25)
        text = "".join(f"{u} {v}\n" for u, v in edges)
        g = load_edge_list(write(tmp_path, text))
        assert g.out_degree.sum() == g.edge_count
        assert g.in_degree.sum() == g.edge_count
        for u, v in edges:
            assert g.has_edge(g.id_map[u], g.id_map[v])

    def test_round_trip(self, tmp_path, rng):
        edges = oracles.random_digraph(rng, 15, 0.2)
        g1 = load_edge_list(write(tmp_path, "".join(f"{u} {v}\n" for u, v in edges)))
        out = tmp_path / "out.txt"
        write_edge_list(g1, out)
        g2 = load_edge_list(out)
        assert np.array_equal(g1.orig_ids, g2.orig_ids)
        assert np.array_equal(np.stack(g1.edges_original()),
                              np.stack(g2.edges_original()))


class TestLargestScc:
    def test_cycle_with_pendant(self):
        g = make_graph([(0, 1), (1, 2), (2, 0), (2, 3)])
        scc = largest_scc(g)
        assert sorted(scc.orig_ids) == [0, 1, 2]
        assert scc.edge_count == 3

    def test_matches_reachability_oracle(self, rng):
        for _ in range(30):
            n = 10
            edges = oracles.random_digraph(rng, n, 0.15)
            if not edges:
                continue
            g = make_graph(edges, n)
            comps = oracles.scc_partition(n, edges)
            best = max(comps, key=lambda c: (len(c), -min(c)))
            scc = largest_scc(g)
            assert set(scc.orig_ids.tolist()) == set(best)
            expect_edges = {(u, v) for u, v in edges if u in best and v in best}
            got = set(zip(*[arr.tolist() for arr in scc.edges_original()]))
            assert got == expect_edges

    def test_idempotent(self, rng):
        edges = oracles.random_digraph(rng, 12, 0.2, ensure_cycle=False)
        g = make_graph(edges, 12)
        s1 = largest_scc(g)
        s2 = largest_scc(s1)
        assert np.array_equal(s1.orig_ids, s2.orig_ids)
        assert np.array_equal(np.stack(s1.edges_original()),
                              np.stack(s2.edges_original()))

    def test_tie_breaks_on_smallest_original_id(self):
        # two 2-cycles; the one containing original id 1 must win
        g = make_graph([(5, 6), (6, 5), (1, 9), (9, 1)])
        scc = largest_scc(g)
        assert sorted(scc.orig_ids) == [1, 9]

    def test_singleton_component(self):
        g = make_graph([(0, 1)])
        scc = largest_scc(g)
        assert scc.n_nodes == 1


class TestLoadScores:
    def test_basic_and_missing_default_zero(self, tmp_path):
        g = make_graph([(0, 1), (1, 2), (2, 0)])
        st = load_scores(write(tmp_path, "0,0.5\n2,0.25\n", "s.csv"), g)
        assert st.score.tolist() == [0.5, 0.0, 0.25]
        assert not st.active.any()

    def test_header_detected(self, tmp_path):
        g = make_graph([(0, 1), (1, 0)])
        st = load_scores(write(tmp_path, "node_id,score\n1,0.75\n", "s.csv"), g)
        assert st.score[1] == 0.75

    def test_empty_file_all_zero(self, tmp_path):
        g = make_graph([(0, 1), (1, 0)])
        st = load_scores(write(tmp_path, "", "s.csv"), g)
        assert not st.score.any()

    def test_clamping_warns(self, tmp_path, caplog):
        g = make_graph([(7, 8), (8, 7)])
        st = load_scores(write(tmp_path, "7,1.3\n", "s.csv"), g)
        assert st.score[g.id_map[7]] == 1.0
        assert any("clamped" in r.message for r in caplog.records)

    def test_bad_score_reports_line(self, tmp_path):
        g = make_graph([(0, 1), (1, 0)])
        with pytest.raises(DataFormatError, match=":2"):
            load_scores(write(tmp_path, "0,0.5\n1,xyz\n", "s.csv"), g)

    def test_unknown_node_skipped_with_warning(self, tmp_path, caplog):
        g = make_graph([(0, 1), (1, 0)])
        st = load_scores(write(tmp_path, "0,0.5\n42,0.9\n", "s.csv"), g)
        assert st.score.tolist() == [0.5, 0.0]
        assert any("not in the graph" in r.message for r in caplog.records)


class TestLoadLabels:
    def test_roundtrip(self, tmp_path):
        g = make_graph([(0, 1), (1, 0)])
        labels = load_labels(write(tmp_path, "0,1\n1,0\n", "l.csv"), g)
        assert labels.tolist() == [True, False]

    def test_missing_label_errors(self, tmp_path):
        g = make_graph([(0, 1), (1, 0)])
        with pytest.raises(DataFormatError, match="missing"):
            load_labels(write(tmp_path, "0,1\n", "l.csv"), g)


class TestAggressionState:
    def test_validate_catches_bad_scores(self):
        st = AggressionState(np.array([0.5, 1.5]))
        with pytest.raises(ValueError):
            st.validate()

    def test_hop_active_coupling(self):
        st = AggressionState(np.array([0.5, 0.5]))
        st.active[0] = True
        with pytest.raises(ValueError):
            st.validate()
        st.hop[0] = 0
        st.validate()
