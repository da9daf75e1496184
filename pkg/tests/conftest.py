import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from aggdiff.graph import AggressionState, DirectedGraph
from aggdiff.weights import WeightedGraph


def make_graph(edges, n=None):
    """DirectedGraph from an edge list; dense ids equal original ids."""
    edges = list(edges)
    if n is None:
        n = max(max(u, v) for u, v in edges) + 1
    src = np.array([u for u, _ in edges], dtype=np.int64)
    dst = np.array([v for _, v in edges], dtype=np.int64)
    return DirectedGraph(n, src, dst, np.arange(n))


def make_weighted(edges, w, n=None, scheme="manual"):
    """WeightedGraph with explicit per-edge weights (keyed by (u,v) pair)."""
    g = make_graph(edges, n)
    wmap = dict(zip(edges, w)) if not isinstance(w, dict) else w
    aligned = np.array([wmap[(int(u), int(v))]
                        for u, v in zip(g.edge_src, g.out_indices)])
    return WeightedGraph(g, scheme, aligned)


def make_state(scores):
    return AggressionState(np.asarray(scores, dtype=np.float64))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
