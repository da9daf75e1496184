"""Aggression-aware Independent Cascade and Linear Threshold engines.

Both models run in synchronous steps over a WeightedGraph and produce a
step-indexed CascadeTrace.  IC is stochastic: each node activated at step t
gets one chance per inactive out-neighbor, succeeding when a uniform draw
falls below the edge weight; the new node adopts aggression from its
successful activators per the configured criterion.  LT is deterministic:
a node activates once the aggregated weight of its active in-neighbors
reaches its threshold, then adopts their mean aggression score.

All randomness flows from named sub-streams of the config seed so that
paired runs (e.g. plain cascade vs. zero-budget competitive run) consume
draws identically.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .graph import AggressionState

logger = logging.getLogger(__name__)

MODELS = ("ic", "lt")
ACTIVATION_CRITERIA = ("random", "top", "cumulative")
THRESHOLD_STRATEGIES = ("aggression", "power", "random")
LT_AGGREGATIONS = ("sum", "mean")


@dataclass
class CascadeConfig:
    model: str
    activation_criterion: str = None  # IC only
    threshold_strategy: str = None    # LT only
    lt_aggregation: str = "sum"
    max_steps: int = None
    rng_seed: int = 0
    record_snapshots: bool = True

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.model == "ic":
            if self.threshold_strategy is not None:
                raise ValueError("IC config must not carry a threshold_strategy")
            if self.activation_criterion is None:
                self.activation_criterion = "cumulative"
            if self.activation_criterion not in ACTIVATION_CRITERIA:
                raise ValueError(f"unknown activation criterion {self.activation_criterion!r}")
        else:
            if self.activation_criterion is not None:
                raise ValueError("LT config must not carry an activation_criterion")
            if self.threshold_strategy is None:
                self.threshold_strategy = "aggression"
            if self.threshold_strategy not in THRESHOLD_STRATEGIES:
                raise ValueError(f"unknown threshold strategy {self.threshold_strategy!r}")
        if self.lt_aggregation not in LT_AGGREGATIONS:
            raise ValueError(f"unknown lt_aggregation {self.lt_aggregation!r}")


@dataclass
class StepRecord:
    step: int
    activated: np.ndarray                 # newly activated this step (seeds at 0)
    scores: np.ndarray = None             # full score snapshot after the step
    positive_activated: np.ndarray = None  # competitive runs only


@dataclass
class CascadeTrace:
    steps: list
    terminal_state: AggressionState
    activated_count: int
    positive_count: int = 0
    step_totals: np.ndarray = None        # total aggression after each step
    active_counts: np.ndarray = None      # cumulative activated per step


def _streams(seed, n, tag=None):
    """Named child RNG streams of a run seed.

    ``tag`` separates stream families (e.g. the positive cascade of a
    competitive run) so equal seeds never alias across families.
    """
    ss = np.random.SeedSequence(seed if tag is None else [seed, tag])
    return [np.random.default_rng(c) for c in ss.spawn(n)]


def _check_seeds(g, seeds):
    seeds = np.asarray(seeds, dtype=np.int64)
    if seeds.size == 0:
        raise ValueError("seed set is empty")
    if seeds.min() < 0 or seeds.max() >= g.n_nodes:
        raise ValueError("seed not in graph")
    if np.unique(seeds).shape[0] != seeds.shape[0]:
        raise ValueError("duplicate seed")
    return np.sort(seeds)


def resolve_ic_transfer(criterion, activators, rng):
    """Aggression adopted by a node from its successful activators.

    activators: list of (node, score) pairs, at least one.  A single
    activator transfers its score under every criterion; otherwise Random
    picks one uniformly, Top takes the max, and Cumulative takes the
    self-weighted sum sum_i (A_i / sum_j A_j) * A_i (0 when all scores are 0).
    """
    if len(activators) == 0:
        raise ValueError("no activators")
    if len(activators) == 1:
        return float(activators[0][1])
    scores = np.array([s for _, s in activators])
    if criterion == "random":
        return float(scores[rng.integers(0, scores.shape[0])])
    if criterion == "top":
        return float(scores.max())
    if criterion == "cumulative":
        total = scores.sum()
        if total == 0.0:
            return 0.0
        return float(np.dot(scores, scores) / total)
    raise ValueError(f"unknown activation criterion {criterion!r}")


class _ICPhase:
    """One cascade's IC attempt machinery with its own RNG streams.

    ``blocked`` marks nodes this cascade may not target (its own active
    set, plus anything shielded from it).  Attempt draws happen in
    ascending (activator, target) order.
    """

    def __init__(self, wg, attempt_rng, transfer_rng, criterion):
        self.g = wg.base
        self.w = wg.w
        self.attempt_rng = attempt_rng
        self.transfer_rng = transfer_rng
        self.criterion = criterion

    def attempt(self, frontier, blocked):
        """Returns (targets ascending, list of activator (node,score) groups)."""
        g = self.g
        n_att = int(kernels.count_ic_attempts(g.out_indptr, g.out_indices,
                                              frontier, blocked))
        if n_att == 0:
            return np.empty(0, dtype=np.int64), []
        uniforms = self.attempt_rng.random(n_att)
        succ_u = np.empty(n_att, dtype=np.int64)
        succ_v = np.empty(n_att, dtype=np.int64)
        m = int(kernels.ic_attempts(g.out_indptr, g.out_indices, self.w,
                                    frontier, blocked, uniforms, succ_u, succ_v))
        if m == 0:
            return np.empty(0, dtype=np.int64), []
        succ_u, succ_v = succ_u[:m], succ_v[:m]
        order = np.argsort(succ_v, kind="stable")  # by target, activators ascending
        succ_u, succ_v = succ_u[order], succ_v[order]
        targets, starts = np.unique(succ_v, return_index=True)
        groups = np.split(succ_u, starts[1:])
        return targets, groups

    def resolve(self, scores, groups):
        return [resolve_ic_transfer(self.criterion,
                                    [(int(u), float(scores[u])) for u in grp],
                                    self.transfer_rng)
                for grp in groups]


def run_ic(wg, state0, seeds, cfg):
    """Run the aggression-aware IC model to completion (or max_steps)."""
    if cfg.model != "ic":
        raise ValueError("config model must be 'ic'")
    g = wg.base
    seeds = _check_seeds(g, seeds)
    attempt_rng, transfer_rng = _streams(cfg.rng_seed, 2)
    phase = _ICPhase(wg, attempt_rng, transfer_rng, cfg.activation_criterion)

    state = state0.copy()
    state.active[:] = False
    state.hop[:] = -1
    state.active[seeds] = True
    state.hop[seeds] = 0

    steps = [StepRecord(0, seeds, state.score.copy() if cfg.record_snapshots else None)]
    totals = [state.score.sum()]
    counts = [seeds.shape[0]]
    frontier = seeds
    t = 0
    while frontier.size and (cfg.max_steps is None or t < cfg.max_steps):
        t += 1
        targets, groups = phase.attempt(frontier, state.active)
        if targets.size == 0:
            break
        new_scores = phase.resolve(state.score, groups)
        state.score[targets] = new_scores
        state.active[targets] = True
        state.hop[targets] = t
        steps.append(StepRecord(t, targets,
                                state.score.copy() if cfg.record_snapshots else None))
        totals.append(state.score.sum())
        counts.append(counts[-1] + targets.shape[0])
        frontier = targets
    return CascadeTrace(steps, state, int(counts[-1]),
                        step_totals=np.asarray(totals),
                        active_counts=np.asarray(counts, dtype=np.int64))


def lt_thresholds(wg, state0, strategy, rng=None):
    """Per-node LT thresholds, fixed for the whole run.

    aggression: the node's initial score; power: in/out degree ratio clamped
    to [0,1] (no out-edges clamps to 1); random: one uniform per node
    (baseline preset).
    """
    g = wg.base
    if strategy == "aggression":
        return state0.score.copy()
    if strategy == "power":
        with np.errstate(divide="ignore", invalid="ignore"):
            p = g.in_degree / g.out_degree
        return np.clip(np.nan_to_num(p, nan=1.0, posinf=1.0), 0.0, 1.0)
    if strategy == "random":
        if rng is None:
            raise ValueError("random thresholds need an RNG stream")
        return rng.random(g.n_nodes)
    raise ValueError(f"unknown threshold strategy {strategy!r}")


class _LTPhase:
    """One cascade's LT evaluation machinery (deterministic)."""

    def __init__(self, wg, theta, mean_mode):
        self.g = wg.base
        self.w_in = wg.w_in
        self.theta = theta
        self.mean_mode = mean_mode

    def candidates_from(self, dirty_sources, eligible):
        """Inactive out-neighbors of the nodes whose status changed."""
        if len(dirty_sources) == 0:
            return np.empty(0, dtype=np.int64)
        g = self.g
        outs = [g.out_neighbors(u) for u in dirty_sources]
        cand = np.unique(np.concatenate(outs)) if outs else np.empty(0, dtype=np.int64)
        return cand[eligible[cand]]

    def evaluate(self, candidates, active, scores):
        if candidates.size == 0:
            return np.empty(0, dtype=np.int64), np.empty(0)
        out_nodes = np.empty(candidates.shape[0], dtype=np.int64)
        out_scores = np.empty(candidates.shape[0])
        m = int(kernels.lt_step(self.g.in_indptr, self.g.in_indices, self.w_in,
                                active.astype(np.uint8), scores, self.theta,
                                candidates, self.mean_mode, out_nodes, out_scores))
        return out_nodes[:m], out_scores[:m]


def run_lt(wg, state0, seeds, cfg):
    """Run the aggression-aware LT model to convergence (or max_steps)."""
    if cfg.model != "lt":
        raise ValueError("config model must be 'lt'")
    g = wg.base
    seeds = _check_seeds(g, seeds)
    (thr_rng,) = _streams(cfg.rng_seed, 1)
    theta = lt_thresholds(wg, state0, cfg.threshold_strategy, thr_rng)
    phase = _LTPhase(wg, theta, cfg.lt_aggregation == "mean")

    state = state0.copy()
    state.active[:] = False
    state.hop[:] = -1
    state.active[seeds] = True
    state.hop[seeds] = 0

    steps = [StepRecord(0, seeds, state.score.copy() if cfg.record_snapshots else None)]
    totals = [state.score.sum()]
    counts = [seeds.shape[0]]
    dirty = seeds
    t = 0
    while dirty.size and (cfg.max_steps is None or t < cfg.max_steps):
        t += 1
        cand = phase.candidates_from(dirty, ~state.active)
        newly, new_scores = phase.evaluate(cand, state.active, state.score)
        if newly.size == 0:
            break
        state.score[newly] = new_scores
        state.active[newly] = True
        state.hop[newly] = t
        steps.append(StepRecord(t, newly,
                                state.score.copy() if cfg.record_snapshots else None))
        totals.append(state.score.sum())
        counts.append(counts[-1] + newly.shape[0])
        dirty = newly
    return CascadeTrace(steps, state, int(counts[-1]),
                        step_totals=np.asarray(totals),
                        active_counts=np.asarray(counts, dtype=np.int64))


def run_cascade(wg, state0, seeds, cfg):
    return (run_ic if cfg.model == "ic" else run_lt)(wg, state0, seeds, cfg)


def snapshot_trace(trace, g, t_a):
    """Per-step metric vectors (each step compared against step 0)."""
    from .metrics import state_vector
    if trace.steps[0].scores is None:
        raise ValueError("trace was recorded without score snapshots")
    s0 = AggressionState(trace.steps[0].scores)
    return [state_vector(g, s0, AggressionState(rec.scores), t_a)
            for rec in trace.steps]


def save_trace_csv(trace, g, path):
    """Newly activated nodes per step: ``step,node,score,hop`` (original ids)."""
    with open(path, "w") as fh:
        fh.write("step,node,score,hop\n")
        for rec in trace.steps:
            for v in rec.activated:
                if rec.scores is not None:
                    score = rec.scores[v]
                else:
                    score = trace.terminal_state.score[v]
                fh.write(f"{rec.step},{g.orig_ids[v]},{score:.17g},{rec.step}\n")


def save_step_summary_csv(trace, path):
    with open(path, "w") as fh:
        fh.write("step,active_count,total_aggression\n")
        for i in range(trace.step_totals.shape[0]):
            fh.write(f"{i},{trace.active_counts[i]},{trace.step_totals[i]:.17g}\n")
