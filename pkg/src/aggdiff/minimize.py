"""Aggression minimization: competitive healing cascades and spectral blocking.

The competitive path (CAM) races a positive cascade against the aggressive
one under the same model family; nodes reached by both at the same step go
positive, and positively-activated nodes leave the negative cascade for
good.  The blocking path (BAM) removes k nodes (shield-score greedy) or k
edges (left/right eigenscore) before the cascade starts, optionally on an
adjacency weighted by endpoint aggression products.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .cascade import (CascadeTrace, StepRecord, _ICPhase, _LTPhase,
                      _check_seeds, _streams, lt_thresholds, run_cascade)
from .seeding import SeedConfig, select_seeds

logger = logging.getLogger(__name__)

MECHANISMS = ("vaccination", "transfer", "decaying", "hybrid")
BLOCK_TARGETS = ("nodes", "edges")
ADJACENCIES = ("jaccard", "aggression")


@dataclass
class HealingConfig:
    mechanism: str
    positive_seed_strategy: SeedConfig = None  # None or budget 0: no competition
    rng_seed: int = 0

    def __post_init__(self):
        if self.mechanism not in MECHANISMS:
            raise ValueError(f"unknown healing mechanism {self.mechanism!r}")


@dataclass
class BlockingConfig:
    target: str
    budget_k: int
    adjacency: str = "jaccard"
    power_iter_tol: float = 1e-9
    power_iter_max: int = 10000

    def __post_init__(self):
        if self.target not in BLOCK_TARGETS:
            raise ValueError(f"unknown blocking target {self.target!r}")
        if self.adjacency not in ADJACENCIES:
            raise ValueError(f"unknown adjacency {self.adjacency!r}")
        if self.budget_k < 0:
            raise ValueError("budget_k must be non-negative")


def heal_positive_seed(a_s, p):
    """Healing rule for positive seeds: drops to 0 unless the draw falls
    below the node's own aggression."""
    return 0.0 if p >= a_s else float(a_s)


def apply_healing(mechanism, transfer_score, hop, current_score, p=None):
    """New score of a positively-activated (non-seed) node.

    transfer_score is the aggression the diffusion model would hand over
    (activator's score under IC, mean of positive in-neighbors under LT);
    hop is the positive-cascade step at which the node activated (>= 1).
    Hybrid needs an independent uniform draw p.
    """
    if hop < 1:
        raise ValueError("hop 0 is reserved for positive seeds")
    if mechanism == "vaccination":
        return 0.0
    if mechanism == "transfer":
        return float(transfer_score)
    if mechanism == "decaying":
        return float(transfer_score) / hop
    if mechanism == "hybrid":
        if p is None:
            raise ValueError("hybrid healing needs a uniform draw")
        if p >= current_score:
            return 0.0
        return float(transfer_score) / hop
    raise ValueError(f"unknown healing mechanism {mechanism!r}")


def _positive_seeds(wg, state0, healing):
    cfg = healing.positive_seed_strategy
    if cfg is None or cfg.budget_k == 0:
        return np.empty(0, dtype=np.int64)
    return np.sort(select_seeds(wg, state0, cfg))


def run_cam(wg, neg_state0, neg_seeds, healing, neg_cfg):
    """Competitive run: aggressive cascade vs. positive (healing) cascade.

    Both cascades use the model and weighting of ``neg_cfg``; the positive
    LT thresholds are always power-based.  With no positive seeds the trace
    is bit-identical to the plain cascade under the same seed.
    """
    g = wg.base
    neg_seeds = _check_seeds(g, neg_seeds)
    pos_seeds = _positive_seeds(wg, neg_state0, healing)
    overlap = np.intersect1d(neg_seeds, pos_seeds)
    if overlap.size:
        logger.warning("%d node(s) seeded by both cascades; positive wins", overlap.size)
        neg_seeds = np.setdiff1d(neg_seeds, overlap)

    heal_rng = _streams(healing.rng_seed, 3, tag=1)[2]

    state = neg_state0.copy()
    state.active[:] = False
    state.hop[:] = -1
    state.active[neg_seeds] = True
    state.hop[neg_seeds] = 0
    pos_active = np.zeros(g.n_nodes, dtype=bool)
    pos_active[pos_seeds] = True
    for v in pos_seeds:  # ascending ids: deterministic draw order
        state.score[v] = heal_positive_seed(state.score[v], heal_rng.random())

    if neg_cfg.model == "ic":
        stepper = _CamICStepper(wg, neg_cfg, healing)
    else:
        stepper = _CamLTStepper(wg, neg_cfg, healing, neg_state0)

    steps = [StepRecord(0, neg_seeds,
                        state.score.copy() if neg_cfg.record_snapshots else None,
                        positive_activated=pos_seeds)]
    totals = [state.score.sum()]
    counts = [neg_seeds.shape[0]]
    neg_frontier, pos_frontier = neg_seeds, pos_seeds
    n_pos = pos_seeds.shape[0]
    t = 0
    while ((neg_frontier.size or pos_frontier.size)
           and (neg_cfg.max_steps is None or t < neg_cfg.max_steps)):
        t += 1
        newly_neg, newly_pos = stepper.step(t, state, pos_active,
                                            neg_frontier, pos_frontier, heal_rng)
        if newly_neg.size == 0 and newly_pos.size == 0:
            break
        steps.append(StepRecord(t, newly_neg,
                                state.score.copy() if neg_cfg.record_snapshots else None,
                                positive_activated=newly_pos))
        totals.append(state.score.sum())
        counts.append(counts[-1] + newly_neg.shape[0])
        n_pos += newly_pos.shape[0]
        neg_frontier, pos_frontier = newly_neg, newly_pos
    return CascadeTrace(steps, state, int(counts[-1]), positive_count=int(n_pos),
                        step_totals=np.asarray(totals),
                        active_counts=np.asarray(counts, dtype=np.int64))


class _CamICStepper:
    def __init__(self, wg, neg_cfg, healing):
        neg_attempt, neg_transfer = _streams(neg_cfg.rng_seed, 2)
        pos_attempt, pos_transfer, _ = _streams(healing.rng_seed, 3, tag=1)
        crit = neg_cfg.activation_criterion
        self.neg = _ICPhase(wg, neg_attempt, neg_transfer, crit)
        self.pos = _ICPhase(wg, pos_attempt, pos_transfer, crit)
        self.mechanism = healing.mechanism

    def step(self, t, state, pos_active, neg_frontier, pos_frontier, heal_rng):
        # Attempts are evaluated against the state frozen at step start;
        # a node reached by both cascades this step goes positive.
        neg_targets, neg_groups = self.neg.attempt(neg_frontier,
                                                   state.active | pos_active)
        pos_targets, pos_groups = self.pos.attempt(pos_frontier, pos_active)
        neg_scores = self.neg.resolve(state.score, neg_groups)
        pos_scores = self.pos.resolve(state.score, pos_groups)

        keep = ~np.isin(neg_targets, pos_targets)
        newly_neg = neg_targets[keep]
        state.score[newly_neg] = [s for s, k in zip(neg_scores, keep) if k]
        state.active[newly_neg] = True
        state.hop[newly_neg] = t

        for v, transfer in zip(pos_targets, pos_scores):
            p = heal_rng.random() if self.mechanism == "hybrid" else None
            state.score[v] = apply_healing(self.mechanism, transfer, t,
                                           state.score[v], p)
        pos_active[pos_targets] = True
        state.active[pos_targets] = False   # healed nodes leave the negative cascade
        state.hop[pos_targets] = -1
        return newly_neg, pos_targets


class _CamLTStepper:
    def __init__(self, wg, neg_cfg, healing, state0):
        (thr_rng,) = _streams(neg_cfg.rng_seed, 1)
        theta_neg = lt_thresholds(wg, state0, neg_cfg.threshold_strategy, thr_rng)
        theta_pos = lt_thresholds(wg, state0, "power")
        mean_mode = neg_cfg.lt_aggregation == "mean"
        self.neg = _LTPhase(wg, theta_neg, mean_mode)
        self.pos = _LTPhase(wg, theta_pos, mean_mode)
        self.mechanism = healing.mechanism
        self.pos_scores_view = None  # scores restricted to the positive cascade

    def step(self, t, state, pos_active, neg_frontier, pos_frontier, heal_rng):
        # Healing may shrink the negative in-neighbor aggregate (mean mode can
        # rise when a member leaves), so nodes adjacent to fresh positive
        # activations are re-checked too.
        neg_dirty = np.union1d(neg_frontier, pos_frontier)
        neg_cand = self.neg.candidates_from(neg_dirty, ~(state.active | pos_active))
        neg_newly, neg_scores = self.neg.evaluate(neg_cand, state.active, state.score)

        pos_cand = self.pos.candidates_from(pos_frontier, ~pos_active)
        pos_newly, pos_transfers = self.pos.evaluate(pos_cand, pos_active, state.score)

        keep = ~np.isin(neg_newly, pos_newly)
        newly_neg = neg_newly[keep]
        state.score[newly_neg] = neg_scores[keep]
        state.active[newly_neg] = True
        state.hop[newly_neg] = t

        for v, transfer in zip(pos_newly, pos_transfers):
            p = heal_rng.random() if self.mechanism == "hybrid" else None
            state.score[v] = apply_healing(self.mechanism, transfer, t,
                                           state.score[v], p)
        pos_active[pos_newly] = True
        state.active[pos_newly] = False
        state.hop[pos_newly] = -1
        return newly_neg, pos_newly


class AdjacencyView:
    """Square non-negative matrix over the graph's edges."""

    def __init__(self, n, edge_src, edge_dst, data):
        self.n = n
        self.edge_src = edge_src
        self.edge_dst = edge_dst
        self.data = np.asarray(data, dtype=np.float64)
        if np.any(self.data < 0):
            raise ValueError("adjacency entries must be non-negative")
        self.mat = sp.csr_matrix((self.data, (edge_src, edge_dst)), shape=(n, n))
        self.mat_t = self.mat.T.tocsr()
        self.sym = ((self.mat + self.mat_t) * 0.5).tocsr()

    @property
    def nnz_total(self):
        return float(self.data.sum())


def weighted_adjacency(wg):
    return AdjacencyView(wg.base.n_nodes, wg.base.edge_src,
                         wg.base.out_indices, wg.w)


def aggression_adjacency(g, state):
    """Entry (u,v) = A_u * A_v on every edge (u,v)."""
    data = state.score[g.edge_src] * state.score[g.out_indices]
    return AdjacencyView(g.n_nodes, g.edge_src, g.out_indices, data)


class PowerIterationError(RuntimeError):
    """Non-convergence; carries the last iterate."""

    def __init__(self, message, lam, vec, iterations):
        super().__init__(message)
        self.lam = lam
        self.vec = vec
        self.iterations = iterations


def power_iteration(adj, tol=1e-9, max_iter=10000, mode="sym"):
    """Dominant eigenpair by shifted power iteration.

    mode "sym" works on (A + A^T)/2 (NetShield); "right"/"left" on the
    directed matrix (NetMelt).  Internally iterates on A + I so that
    periodic structures (cycles, bipartite stars) still converge; the
    reported eigenvalue is shifted back.  The returned vector is
    non-negative with unit 2-norm.
    """
    if adj.nnz_total == 0.0:
        raise ValueError("adjacency matrix is zero")
    if mode == "sym":
        mv = adj.sym.dot
    elif mode == "right":
        mv = adj.mat.dot
    elif mode == "left":
        mv = adj.mat_t.dot
    else:
        raise ValueError(f"unknown mode {mode!r}")
    n = adj.n
    x = np.full(n, 1.0 / np.sqrt(n))
    lam_prev = np.inf
    for it in range(1, max_iter + 1):
        y = mv(x) + x
        ny = np.linalg.norm(y)
        x = y / ny
        lam = ny - 1.0
        if abs(lam - lam_prev) < tol:
            return float(lam), x
        lam_prev = lam
    raise PowerIterationError(
        f"power iteration did not converge within {max_iter} iterations",
        float(lam_prev), x, max_iter)


def net_shield(adj, k, lam, u):
    """Greedy shield-score node selection on the symmetrized adjacency.

    Each round adds the node with the largest marginal shield score
    2*lam*u(i)^2 - A(i,i)*u(i)^2 - 2*u(i)*sum_{j in S} A(i,j)*u(j); ties go
    to the smaller id.
    """
    n = adj.n
    if k >= n:
        raise ValueError("k must be smaller than the node count")
    sym = adj.sym
    base = (2.0 * lam - sym.diagonal()) * u * u
    b = np.zeros(n)
    chosen = np.zeros(n, dtype=bool)
    picks = []
    for _ in range(k):
        scores = base - 2.0 * b * u
        scores[chosen] = -np.inf
        j = int(np.argmax(scores))
        picks.append(j)
        chosen[j] = True
        row = sym.getrow(j)
        b[row.indices] += row.data * u[j]
    return np.asarray(picks, dtype=np.int64)


def net_melt(adj, k, u_left, u_right):
    """k edges with the largest u_left(src)*u_right(dst); lexicographic ties."""
    m = adj.edge_src.shape[0]
    if k >= m:
        raise ValueError("k must be smaller than the edge count")
    score = u_left[adj.edge_src] * u_right[adj.edge_dst]
    order = np.lexsort((adj.edge_dst, adj.edge_src, -score))
    top = order[:k]
    return np.stack([adj.edge_src[top], adj.edge_dst[top]], axis=1)


@dataclass
class BamResult:
    removed: np.ndarray      # node ids, or (k,2) edge array
    trace: CascadeTrace
    baseline_trace: CascadeTrace


def run_bam(wg, state0, blocking, neg_cfg, neg_seed_cfg):
    """Offline blocking run: remove, re-seed, cascade; paired baseline.

    The removal set comes from NetShield (nodes) or NetMelt (edges) on the
    configured adjacency; weights of surviving edges are kept as computed
    at t0.  Seeding is re-run on the mutated graph so degree-based
    strategies see post-removal degrees.  The baseline is the same cascade
    with identical RNG seeds and no removal.
    """
    g = wg.base
    if blocking.adjacency == "aggression":
        adj = aggression_adjacency(g, state0)
    else:
        adj = weighted_adjacency(wg)

    if blocking.budget_k == 0:
        removed = (np.empty(0, dtype=np.int64) if blocking.target == "nodes"
                   else np.empty((0, 2), dtype=np.int64))
        wg_cut, state_cut, exclude = wg, state0, None
    elif blocking.target == "nodes":
        lam, u = power_iteration(adj, blocking.power_iter_tol, blocking.power_iter_max)
        removed = net_shield(adj, blocking.budget_k, lam, u)
        wg_cut = wg.drop_nodes(removed)
        state_cut = state0.copy()
        state_cut.score[removed] = 0.0
        exclude = removed
    else:
        _, ur = power_iteration(adj, blocking.power_iter_tol,
                                blocking.power_iter_max, mode="right")
        _, ul = power_iteration(adj, blocking.power_iter_tol,
                                blocking.power_iter_max, mode="left")
        removed = net_melt(adj, blocking.budget_k, ul, ur)
        keep = np.ones(g.edge_count, dtype=bool)
        for u_, v_ in removed:
            keep[g.edge_pos(int(u_), int(v_))] = False
        wg_cut = wg.drop_edges(keep)
        state_cut, exclude = state0, None

    baseline_seeds = select_seeds(wg, state0, neg_seed_cfg)
    baseline = _run_or_null(wg, state0, baseline_seeds, neg_cfg)
    seeds = select_seeds(wg_cut, state_cut, neg_seed_cfg, exclude=exclude)
    trace = _run_or_null(wg_cut, state_cut, seeds, neg_cfg)
    return BamResult(removed, trace, baseline)


def _run_or_null(wg, state0, seeds, neg_cfg):
    # Removal may leave nothing to seed; that is a valid run with zero spread.
    if seeds.size == 0:
        logger.warning("no seeds available; cascade does not start")
        state = state0.copy()
        state.active[:] = False
        state.hop[:] = -1
        rec = StepRecord(0, seeds, state.score.copy() if neg_cfg.record_snapshots else None)
        return CascadeTrace([rec], state, 0,
                            step_totals=np.asarray([state.score.sum()]),
                            active_counts=np.zeros(1, dtype=np.int64))
    return run_cascade(wg, state0, seeds, neg_cfg)


def save_removed(removed, g, path):
    """Removal-set export: node ids, or ``src dst`` pairs (original ids)."""
    with open(path, "w") as fh:
        if removed.ndim == 1:
            for v in removed:
                fh.write(f"{g.orig_ids[v]}\n")
        else:
            for u, v in removed:
                fh.write(f"{g.orig_ids[u]} {g.orig_ids[v]}\n")


def save_reduction_csv(trace, baseline, path):
    """Per-step ``step,total_aggression,baseline_total,ratio``; the shorter
    trajectory is padded with its terminal total (converged)."""
    a = trace.step_totals
    b = baseline.step_totals
    steps = max(a.shape[0], b.shape[0])
    with open(path, "w") as fh:
        fh.write("step,total_aggression,baseline_total,ratio\n")
        for i in range(steps):
            x = a[min(i, a.shape[0] - 1)]
            y = b[min(i, b.shape[0] - 1)]
            ratio = x / y if y != 0.0 else float("nan")
            fh.write(f"{i},{x:.17g},{y:.17g},{ratio:.17g}\n")
