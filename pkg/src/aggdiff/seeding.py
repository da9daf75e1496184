"""Aggressive-user definition and the five seed-selection strategies."""

import heapq
import logging
import math
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)

STRATEGIES = ("all", "top", "sd", "dd", "random")


@dataclass
class SeedConfig:
    strategy: str
    budget_k: int
    aggressive_percentile: object = "nonzero"  # float in [0,100] or "nonzero"
    dd_probability: float = 0.01
    rng_seed: int = 0

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown seed strategy {self.strategy!r}")
        if self.aggressive_percentile != "nonzero":
            p = float(self.aggressive_percentile)
            if not 0.0 <= p <= 100.0:
                raise ValueError("aggressive_percentile must be in [0,100] or 'nonzero'")
            self.aggressive_percentile = p
        if not 0.0 < self.dd_probability <= 1.0:
            raise ValueError("dd_probability must be in (0,1]")


def percentile_threshold(scores, pct):
    """Nearest-rank percentile: value of the ceil(pct*n/100)-th smallest score."""
    s = np.sort(np.asarray(scores, dtype=np.float64))
    rank = max(1, math.ceil(pct / 100.0 * s.shape[0]))
    return float(s[rank - 1])


def aggressive_set(state, cfg):
    """Nodes counted as aggressive under the config's percentile rule.

    Mode "nonzero" takes every node with a positive score; a numeric
    percentile i takes every node scoring at least the i-th percentile of
    the full score distribution.  Returns a sorted dense-id array.
    """
    if cfg.aggressive_percentile == "nonzero":
        return np.flatnonzero(state.score > 0.0)
    if not np.any(state.score > 0.0):
        logger.warning("all aggression scores are zero; aggressive set is empty")
        return np.empty(0, dtype=np.int64)
    thr = percentile_threshold(state.score, cfg.aggressive_percentile)
    return np.flatnonzero(state.score >= thr)


def _eligible(n, exclude):
    mask = np.ones(n, dtype=bool)
    if exclude is not None and len(exclude) > 0:
        mask[np.asarray(list(exclude), dtype=np.int64)] = False
    return mask


def _single_discount(g, k, mask):
    deg = g.out_degree.astype(np.int64).copy()
    pool = np.flatnonzero(mask)
    heap = [(-int(deg[v]), int(v)) for v in pool]
    heapq.heapify(heap)
    picked = np.zeros(g.n_nodes, dtype=bool)
    seeds = []
    while heap and len(seeds) < k:
        d, v = heapq.heappop(heap)
        if picked[v] or -d != deg[v]:
            continue
        picked[v] = True
        seeds.append(v)
        for u in g.in_neighbors(v):
            if mask[u] and not picked[u]:
                deg[u] -= 1
                heapq.heappush(heap, (-int(deg[u]), int(u)))
    return np.asarray(seeds, dtype=np.int64)


def _degree_discount(g, k, p, mask):
    # Chen et al.'s IC-aware discount: dd_v = d_v - 2 t_v - (d_v - t_v) t_v p
    # with t_v the number of already-selected in-neighbors of v.
    d = g.out_degree.astype(np.float64)
    t = np.zeros(g.n_nodes, dtype=np.int64)
    dd = d.copy()
    pool = np.flatnonzero(mask)
    heap = [(-dd[v], int(v)) for v in pool]
    heapq.heapify(heap)
    picked = np.zeros(g.n_nodes, dtype=bool)
    seeds = []
    while heap and len(seeds) < k:
        score, v = heapq.heappop(heap)
        if picked[v] or -score != dd[v]:
            continue
        picked[v] = True
        seeds.append(v)
        for u in g.out_neighbors(v):
            if mask[u] and not picked[u]:
                t[u] += 1
                dd[u] = d[u] - 2.0 * t[u] - (d[u] - t[u]) * t[u] * p
                heapq.heappush(heap, (-dd[u], int(u)))
    return np.asarray(seeds, dtype=np.int64)


def select_seeds(wg, state, cfg, exclude=None):
    """Pick seed nodes per the configured strategy.

    Returns an ordered array of at most ``budget_k`` dense node ids (order =
    selection order).  ``exclude`` removes nodes from consideration (used
    after blocking removals).  Ties everywhere break toward the smaller id.
    """
    g = wg.base
    if cfg.budget_k <= 0:
        raise ValueError("budget_k must be positive")
    if cfg.budget_k > g.n_nodes:
        raise ValueError("budget_k exceeds node count")
    mask = _eligible(g.n_nodes, exclude)
    if cfg.strategy in ("all", "top"):
        agg = aggressive_set(state, cfg)
        agg = agg[mask[agg]]
        if cfg.strategy == "all" or cfg.budget_k > agg.shape[0]:
            return np.sort(agg)
        order = np.lexsort((agg, -state.score[agg]))
        return agg[order[:cfg.budget_k]]
    if cfg.strategy == "sd":
        return _single_discount(g, cfg.budget_k, mask)
    if cfg.strategy == "dd":
        return _degree_discount(g, cfg.budget_k, cfg.dd_probability, mask)
    # random: uniform sample without replacement
    rng = np.random.default_rng(cfg.rng_seed)
    pool = np.flatnonzero(mask)
    k = min(cfg.budget_k, pool.shape[0])
    return rng.choice(pool, size=k, replace=False)


def save_seeds(seeds, g, path):
    """One original node id per line."""
    with open(path, "w") as fh:
        for v in seeds:
            fh.write(f"{g.orig_ids[v]}\n")


def load_seeds(path, g):
    seeds = []
    id_map = g.id_map
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            try:
                orig = int(s)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: bad node id {s!r}") from None
            if orig not in id_map:
                raise ValueError(f"{path}:{lineno}: node {orig} not in graph")
            seeds.append(id_map[orig])
    return np.asarray(seeds, dtype=np.int64)
