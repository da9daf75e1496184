"""Directed-graph ingestion and the immutable CSR graph model.

Node identifiers from input files are arbitrary non-negative integers; they
are re-indexed densely to 0..n-1 internally, with ``orig_ids`` mapping dense
ids back to the originals.  All adjacency rows are sorted ascending.
"""

import logging

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

logger = logging.getLogger(__name__)


class DataFormatError(ValueError):
    """Raised when an input file exists but its content cannot be parsed."""


class DirectedGraph:
    """Immutable directed graph in compressed sparse row form.

    Exposes out- and in-adjacency (both with sorted rows), the permutation
    ``in_to_out`` mapping each in-CSR edge slot to its out-CSR slot, and the
    original node identifiers.  Safe to share across concurrent reads.
    """

    def __init__(self, n_nodes, edge_src, edge_dst, orig_ids):
        edge_src = np.asarray(edge_src, dtype=np.int64)
        edge_dst = np.asarray(edge_dst, dtype=np.int64)
        order = np.lexsort((edge_dst, edge_src))
        self.n_nodes = int(n_nodes)
        self.edge_src = edge_src[order]
        self.out_indices = edge_dst[order]
        counts = np.bincount(self.edge_src, minlength=self.n_nodes)
        self.out_indptr = np.concatenate(([0], np.cumsum(counts))).astype(np.int64)
        # in-CSR: edges grouped by destination, sources ascending
        self.in_to_out = np.lexsort((self.edge_src, self.out_indices))
        self.in_indices = self.edge_src[self.in_to_out]
        in_counts = np.bincount(self.out_indices, minlength=self.n_nodes)
        self.in_indptr = np.concatenate(([0], np.cumsum(in_counts))).astype(np.int64)
        self.orig_ids = np.asarray(orig_ids, dtype=np.int64)
        if self.orig_ids.shape[0] != self.n_nodes:
            raise ValueError("orig_ids length must equal n_nodes")
        self.edge_count = int(self.edge_src.shape[0])
        self._id_map = None

    @property
    def id_map(self):
        """dict: original node id -> dense id."""
        if self._id_map is None:
            self._id_map = {int(o): i for i, o in enumerate(self.orig_ids)}
        return self._id_map

    @property
    def out_degree(self):
        return np.diff(self.out_indptr)

    @property
    def in_degree(self):
        return np.diff(self.in_indptr)

    def out_neighbors(self, u):
        return self.out_indices[self.out_indptr[u]:self.out_indptr[u + 1]]

    def in_neighbors(self, v):
        return self.in_indices[self.in_indptr[v]:self.in_indptr[v + 1]]

    def edge_pos(self, u, v):
        """Out-CSR slot of edge (u, v), or -1 if absent."""
        lo, hi = self.out_indptr[u], self.out_indptr[u + 1]
        pos = lo + np.searchsorted(self.out_indices[lo:hi], v)
        if pos < hi and self.out_indices[pos] == v:
            return int(pos)
        return -1

    def has_edge(self, u, v):
        return self.edge_pos(u, v) >= 0

    def to_scipy(self, data=None):
        """CSR adjacency matrix; ``data`` defaults to ones."""
        if data is None:
            data = np.ones(self.edge_count)
        return sp.csr_matrix((data, self.out_indices, self.out_indptr),
                             shape=(self.n_nodes, self.n_nodes))

    def edges_original(self):
        """(src, dst) arrays in original node identifiers."""
        return self.orig_ids[self.edge_src], self.orig_ids[self.out_indices]

    def drop_edges(self, keep_mask):
        """New graph keeping only out-CSR edge slots where keep_mask is True.

        Node set and dense indexing are preserved; removed endpoints may
        become isolated.
        """
        keep_mask = np.asarray(keep_mask, dtype=bool)
        return DirectedGraph(self.n_nodes, self.edge_src[keep_mask],
                             self.out_indices[keep_mask], self.orig_ids)

    def drop_nodes(self, nodes):
        """New graph with all edges incident to ``nodes`` removed.

        The node set and dense indexing are preserved (removed nodes become
        isolated); callers are expected to also exclude them from seeding
        and zero their scores.
        """
        gone = np.zeros(self.n_nodes, dtype=bool)
        gone[np.asarray(nodes, dtype=np.int64)] = True
        keep = ~(gone[self.edge_src] | gone[self.out_indices])
        return self.drop_edges(keep)


class AggressionState:
    """Per-node aggression score in [0,1] plus activation status and hop.

    ``hop[v]`` is the activation distance (seeds are 0) and is -1 whenever
    ``active[v]`` is False.  A state instance is owned by a single run.
    """

    def __init__(self, score, active=None, hop=None):
        self.score = np.asarray(score, dtype=np.float64)
        n = self.score.shape[0]
        self.active = np.zeros(n, dtype=bool) if active is None else np.asarray(active, dtype=bool)
        self.hop = np.full(n, -1, dtype=np.int64) if hop is None else np.asarray(hop, dtype=np.int64)

    @classmethod
    def zeros(cls, n):
        return cls(np.zeros(n))

    @property
    def n_nodes(self):
        return self.score.shape[0]

    def copy(self):
        return AggressionState(self.score.copy(), self.active.copy(), self.hop.copy())

    def validate(self):
        if np.any(self.score < 0.0) or np.any(self.score > 1.0):
            raise ValueError("scores outside [0,1]")
        if np.any((self.hop >= 0) != self.active):
            raise ValueError("hop must be defined exactly for active nodes")


def load_edge_list(path):
    """Parse a SNAP-style edge list into a DirectedGraph.

    Lines starting with ``#`` are comments; every other line must hold two
    whitespace-separated non-negative integer ids.  Duplicate edges are
    dropped, self-loops are dropped with a logged count, and nodes are the
    endpoints of the surviving edges.
    """
    srcs = []
    dsts = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            if len(parts) != 2:
                raise DataFormatError(f"{path}:{lineno}: expected 'SRC DST', got {s!r}")
            try:
                u = int(parts[0])
                v = int(parts[1])
            except ValueError:
                raise DataFormatError(f"{path}:{lineno}: non-integer node id in {s!r}") from None
            if u < 0 or v < 0:
                raise DataFormatError(f"{path}:{lineno}: negative node id in {s!r}")
            srcs.append(u)
            dsts.append(v)
    if not srcs:
        raise DataFormatError(f"{path}: no edges found")
    src = np.asarray(srcs, dtype=np.int64)
    dst = np.asarray(dsts, dtype=np.int64)
    loops = src == dst
    n_loops = int(loops.sum())
    if n_loops:
        logger.warning("%s: dropped %d self-loop line(s)", path, n_loops)
        src, dst = src[~loops], dst[~loops]
    if src.size == 0:
        raise DataFormatError(f"{path}: no edges left after dropping self-loops")
    pairs = np.unique(np.stack([src, dst], axis=1), axis=0)
    n_dupes = src.size - pairs.shape[0]
    if n_dupes:
        logger.warning("%s: dropped %d duplicate edge line(s)", path, n_dupes)
    orig_ids = np.unique(pairs)
    dense_src = np.searchsorted(orig_ids, pairs[:, 0])
    dense_dst = np.searchsorted(orig_ids, pairs[:, 1])
    return DirectedGraph(orig_ids.shape[0], dense_src, dense_dst, orig_ids)


def write_edge_list(g, path):
    """Write the graph back as 'SRC DST' lines in original ids."""
    src, dst = g.edges_original()
    with open(path, "w") as fh:
        for u, v in zip(src, dst):
            fh.write(f"{u} {v}\n")


def largest_scc(g):
    """Induced subgraph on the largest strongly connected component.

    Size ties are broken by the component containing the smallest original
    node id.  The result is densely re-indexed; original ids carry over.
    """
    if g.n_nodes == 0:
        raise ValueError("empty graph")
    n_comp, labels = connected_components(g.to_scipy(), directed=True,
                                          connection="strong")
    sizes = np.bincount(labels, minlength=n_comp)
    best_size = sizes.max()
    tied = np.flatnonzero(sizes == best_size)
    if tied.shape[0] == 1:
        best = tied[0]
    else:
        best = min(tied, key=lambda lab: g.orig_ids[labels == lab].min())
    member = labels == best
    keep = member[g.edge_src] & member[g.out_indices]
    kept_nodes = np.flatnonzero(member)
    remap = np.full(g.n_nodes, -1, dtype=np.int64)
    remap[kept_nodes] = np.arange(kept_nodes.shape[0])
    return DirectedGraph(kept_nodes.shape[0], remap[g.edge_src[keep]],
                         remap[g.out_indices[keep]], g.orig_ids[kept_nodes])


def load_scores(path, g):
    """Load per-node aggression scores (CSV rows ``node_id,score``).

    A header row is detected by a non-numeric first field.  Nodes absent
    from the file get score 0.  Out-of-range scores are clamped to [0,1]
    and rows naming unknown nodes are skipped; both are logged.
    """
    score = np.zeros(g.n_nodes)
    id_map = g.id_map
    n_clamped = 0
    n_unknown = 0
    seen_data = False
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = [p.strip() for p in s.split(",")]
            if len(parts) != 2:
                raise DataFormatError(f"{path}:{lineno}: expected 'node_id,score', got {s!r}")
            try:
                node = int(parts[0])
            except ValueError:
                if not seen_data:
                    continue  # optional header row
                raise DataFormatError(f"{path}:{lineno}: bad node id {parts[0]!r}") from None
            seen_data = True
            try:
                val = float(parts[1])
            except ValueError:
                raise DataFormatError(f"{path}:{lineno}: bad score {parts[1]!r}") from None
            if node not in id_map:
                n_unknown += 1
                continue
            if val < 0.0 or val > 1.0:
                n_clamped += 1
                val = min(max(val, 0.0), 1.0)
            score[id_map[node]] = val
    if n_clamped:
        logger.warning("%s: clamped %d score(s) into [0,1]", path, n_clamped)
    if n_unknown:
        logger.warning("%s: skipped %d row(s) for nodes not in the graph", path, n_unknown)
    return AggressionState(score)


def load_labels(path, g):
    """Binary node labels (CSV ``node_id,label`` with label 0 or 1).

    Every graph node must be labeled; rows for unknown nodes are skipped
    with a warning.
    """
    labels = np.zeros(g.n_nodes, dtype=bool)
    seen = np.zeros(g.n_nodes, dtype=bool)
    id_map = g.id_map
    seen_data = False
    n_unknown = 0
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = [p.strip() for p in s.split(",")]
            if len(parts) != 2:
                raise DataFormatError(f"{path}:{lineno}: expected 'node_id,label', got {s!r}")
            try:
                node = int(parts[0])
            except ValueError:
                if not seen_data:
                    continue
                raise DataFormatError(f"{path}:{lineno}: bad node id {parts[0]!r}") from None
            seen_data = True
            if parts[1] not in ("0", "1"):
                raise DataFormatError(f"{path}:{lineno}: label must be 0 or 1, got {parts[1]!r}")
            if node not in id_map:
                n_unknown += 1
                continue
            dense = id_map[node]
            labels[dense] = parts[1] == "1"
            seen[dense] = True
    if n_unknown:
        logger.warning("%s: skipped %d row(s) for nodes not in the graph", path, n_unknown)
    if not seen.all():
        raise DataFormatError(
            f"{path}: {int((~seen).sum())} graph node(s) missing a label")
    return labels


def save_scores(state, g, path):
    """Write non-zero scores as ``node_id,score`` rows in original ids."""
    with open(path, "w") as fh:
        fh.write("node_id,score\n")
        for v in np.flatnonzero(state.score != 0.0):
            fh.write(f"{g.orig_ids[v]},{state.score[v]:.17g}\n")
