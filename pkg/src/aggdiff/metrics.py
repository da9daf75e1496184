"""The 26-metric validation vector, dichotomization, cosine similarity,
total aggression, and rank-based AUC."""

import numpy as np
from scipy.stats import rankdata

from .graph import DataFormatError

NODE_STATES = ("n", "a")
EDGE_STATES = ("N-N", "N-A", "A-N", "A-A")

METRIC_NAMES = (
    "n", "a",
    "N-N", "N-A", "A-N", "A-A",
    "n->n", "n->a", "a->n", "a->a",
    "N-N->N-N", "N-N->N-A", "N-N->A-N", "N-N->A-A",
    "N-A->N-N", "N-A->N-A", "N-A->A-N", "N-A->A-A",
    "A-N->N-N", "A-N->N-A", "A-N->A-N", "A-N->A-A",
    "A-A->N-N", "A-A->N-A", "A-A->A-N", "A-A->A-A",
)

DEFAULT_TA = 0.4


class MetricVector:
    """The 26 named fractions in canonical order."""

    def __init__(self, values):
        self.values = np.asarray(values, dtype=np.float64)
        if self.values.shape != (26,):
            raise ValueError("metric vector must have exactly 26 entries")

    def __getitem__(self, name):
        return float(self.values[METRIC_NAMES.index(name)])

    def __len__(self):
        return 26

    def as_dict(self):
        return {name: float(v) for name, v in zip(METRIC_NAMES, self.values)}


def dichotomize(state, t_a):
    """Boolean per-node labels; True (Aggressive) iff score >= t_a."""
    scores = state.score if hasattr(state, "score") else np.asarray(state)
    return scores >= t_a


def state_vector(g, state_t0, state_ti, t_a=DEFAULT_TA):
    """Compare a snapshot against the initial state.

    Entries 0-5 are the node/edge state fractions at t_i; entries 6-9 the
    node transitions from t_0 and 10-25 the ordered-edge transitions, all
    as fractions of |V| or |E|.  Edge labels are ordered source-first.
    """
    n, m = g.n_nodes, g.edge_count
    if state_t0.n_nodes != n or state_ti.n_nodes != n:
        raise ValueError("states must cover the graph's node set")
    a0 = dichotomize(state_t0, t_a)
    a1 = dichotomize(state_ti, t_a)
    out = np.empty(26)
    out[0] = np.count_nonzero(~a1) / n
    out[1] = np.count_nonzero(a1) / n
    src, dst = g.edge_src, g.out_indices
    e1 = 2 * a1[src].astype(np.int64) + a1[dst]
    edge_counts_t1 = np.bincount(e1, minlength=4)
    out[2:6] = edge_counts_t1 / m if m else 0.0
    node_code = 2 * a0.astype(np.int64) + a1
    out[6:10] = np.bincount(node_code, minlength=4) / n
    e0 = 2 * a0[src].astype(np.int64) + a0[dst]
    edge_code = 4 * e0 + e1
    out[10:26] = np.bincount(edge_code, minlength=16) / m if m else 0.0
    return MetricVector(out)


def cosine_similarity(a, b):
    """dot(a,b) / (|a||b|); raises on a zero-norm input."""
    va = a.values if isinstance(a, MetricVector) else np.asarray(a, dtype=np.float64)
    vb = b.values if isinstance(b, MetricVector) else np.asarray(b, dtype=np.float64)
    na, nb = np.linalg.norm(va), np.linalg.norm(vb)
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine similarity undefined for a zero vector")
    return float(np.dot(va, vb) / (na * nb))


def total_aggression(state):
    return float(np.sum(state.score if hasattr(state, "score") else state))


def auc(predicted_scores, labels):
    """Rank-based AUC: P(random positive outranks random negative), ties 1/2."""
    scores = np.asarray(predicted_scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    n_pos = int(labels.sum())
    n_neg = labels.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both classes present")
    ranks = rankdata(scores)
    return float((ranks[labels].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def load_ground_truth(path):
    """Ground-truth vector file: CSV ``metric_name,value``; all 26 names
    must appear exactly once."""
    seen = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = [p.strip() for p in s.split(",")]
            if len(parts) != 2:
                raise DataFormatError(f"{path}:{lineno}: expected 'metric_name,value'")
            name, raw = parts
            if name == "metric_name":
                continue
            if name not in METRIC_NAMES:
                raise DataFormatError(f"{path}:{lineno}: unknown metric name {name!r}")
            try:
                seen[name] = float(raw)
            except ValueError:
                raise DataFormatError(f"{path}:{lineno}: bad value {raw!r}") from None
    missing = [nm for nm in METRIC_NAMES if nm not in seen]
    if missing:
        raise DataFormatError(f"{path}: missing metric name(s): {', '.join(missing)}")
    return MetricVector([seen[nm] for nm in METRIC_NAMES])


def save_metrics_csv(vectors, path, cosine_against=None):
    """Per-step metric CSV: step column, 26 metric columns, optional cosine."""
    header = ["step", *METRIC_NAMES]
    if cosine_against is not None:
        header.append("cosine")
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for i, vec in enumerate(vectors):
            row = [str(i)] + [f"{v:.17g}" for v in vec.values]
            if cosine_against is not None:
                row.append(f"{cosine_similarity(vec, cosine_against):.17g}")
            fh.write(",".join(row) + "\n")
