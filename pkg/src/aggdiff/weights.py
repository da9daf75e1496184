"""Edge weighting schemes over the directed graph.

Three structural schemes are provided (neighborhood overlap, in/out power
ratio, and their product), plus a uniform-random scheme used by the
baseline model presets.  Weights are pure functions of topology (random
ones of the seed) and are computed once per run; they are not recomputed
after node/edge removal.
"""

import logging

import numpy as np

from . import kernels
from .graph import DirectedGraph

logger = logging.getLogger(__name__)

SCHEMES = ("jaccard", "power", "weighted", "random")


class WeightedGraph:
    """A DirectedGraph plus one weight per edge, aligned to the out-CSR."""

    def __init__(self, base, scheme, w):
        self.base = base
        self.scheme = scheme
        self.w = np.asarray(w, dtype=np.float64)
        if self.w.shape[0] != base.edge_count:
            raise ValueError("one weight per edge required")
        self._w_in = None

    @property
    def w_in(self):
        """Edge weights re-ordered to the in-CSR layout (for LT sweeps)."""
        if self._w_in is None:
            self._w_in = self.w[self.base.in_to_out]
        return self._w_in

    def edge_weight(self, u, v):
        pos = self.base.edge_pos(u, v)
        if pos < 0:
            raise ValueError(f"edge ({u},{v}) not in graph")
        return float(self.w[pos])

    def drop_edges(self, keep_mask):
        keep_mask = np.asarray(keep_mask, dtype=bool)
        return WeightedGraph(self.base.drop_edges(keep_mask), self.scheme,
                             self.w[keep_mask])

    def drop_nodes(self, nodes):
        gone = np.zeros(self.base.n_nodes, dtype=bool)
        gone[np.asarray(nodes, dtype=np.int64)] = True
        keep = ~(gone[self.base.edge_src] | gone[self.base.out_indices])
        return self.drop_edges(keep)

    def dump_csv(self, path):
        """Debug dump: one ``src,dst,weight`` row per edge (original ids)."""
        src, dst = self.base.edges_original()
        with open(path, "w") as fh:
            fh.write("src,dst,weight\n")
            for u, v, x in zip(src, dst, self.w):
                fh.write(f"{u},{v},{x:.17g}\n")


def neighborhood_csr(g):
    """CSR of undirected neighborhoods N_x = in(x) ∪ out(x), self excluded.

    Cached on the graph instance; rows sorted ascending.
    """
    cached = getattr(g, "_nbr_csr", None)
    if cached is not None:
        return cached
    n = g.n_nodes
    a = np.concatenate([g.edge_src, g.out_indices])
    b = np.concatenate([g.out_indices, g.edge_src])
    key = np.unique(a * np.int64(n) + b)
    owner = key // n
    nbr = key % n
    indptr = np.concatenate(([0], np.cumsum(np.bincount(owner, minlength=n)))).astype(np.int64)
    g._nbr_csr = (indptr, nbr.astype(np.int64))
    return g._nbr_csr


def neighborhood(g, u):
    indptr, indices = neighborhood_csr(g)
    return indices[indptr[u]:indptr[u + 1]]


def jaccard_weight(g, u, v):
    """|N_u ∩ N_v| / |N_u ∪ N_v| for an existing edge; 0 on empty union."""
    if not g.has_edge(u, v):
        raise ValueError(f"edge ({u},{v}) not in graph")
    nu = set(neighborhood(g, u).tolist())
    nv = set(neighborhood(g, v).tolist())
    union = len(nu | nv)
    if union == 0:
        return 0.0
    return len(nu & nv) / union


def power_score(g, u):
    """in-degree / out-degree; +inf when the node has no out-edges."""
    out = g.out_degree[u]
    if out == 0:
        return float("inf")
    return g.in_degree[u] / out


def edge_power(g, u, v):
    """min(P_v / P_u, 1) for an existing edge; 0 when P_u is 0 or infinite."""
    if not g.has_edge(u, v):
        raise ValueError(f"edge ({u},{v}) not in graph")
    pu = power_score(g, u)
    if pu == 0.0 or np.isinf(pu):
        logger.warning("edge (%d,%d): power score of source is %s, weight set to 0", u, v, pu)
        return 0.0
    return min(power_score(g, v) / pu, 1.0)


def weighted_overlap(g, u, v):
    return edge_power(g, u, v) * jaccard_weight(g, u, v)


def _jaccard_all(g):
    indptr, indices = neighborhood_csr(g)
    inter = np.zeros(g.edge_count, dtype=np.int64)
    kernels.sorted_intersection_counts(indptr, indices, g.edge_src,
                                       g.out_indices, inter)
    sizes = np.diff(indptr)
    union = sizes[g.edge_src] + sizes[g.out_indices] - inter
    return np.divide(inter, union, out=np.zeros(g.edge_count), where=union > 0)


def _power_all(g):
    with np.errstate(divide="ignore", invalid="ignore"):
        p = g.in_degree / g.out_degree
        ratio = p[g.out_indices] / p[g.edge_src]
    w = np.minimum(ratio, 1.0)
    bad = (p[g.edge_src] == 0.0) | np.isinf(p[g.edge_src]) | np.isnan(ratio)
    if bad.any():
        logger.warning("power scheme: %d edge(s) with zero/infinite source power, weight 0",
                       int(bad.sum()))
        w[bad] = 0.0
    return w


def apply_scheme(g, scheme, rng_seed=0):
    """Materialize a WeightedGraph under the named scheme.

    Deterministic for the structural schemes; ``random`` draws one uniform
    weight per edge from ``rng_seed`` (baseline preset).
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown weighting scheme {scheme!r}")
    if scheme == "jaccard":
        w = _jaccard_all(g)
    elif scheme == "power":
        w = _power_all(g)
    elif scheme == "weighted":
        w = _power_all(g) * _jaccard_all(g)
    else:
        rng = np.random.default_rng(rng_seed)
        w = rng.random(g.edge_count)
    return WeightedGraph(g, scheme, w)
