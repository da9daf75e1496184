"""Aggression diffusion modeling and minimization on directed social graphs."""

from .cascade import (CascadeConfig, CascadeTrace, StepRecord, resolve_ic_transfer,
                      run_cascade, run_ic, run_lt, snapshot_trace)
from .graph import (AggressionState, DataFormatError, DirectedGraph, largest_scc,
                    load_edge_list, load_labels, load_scores, write_edge_list)
from .metrics import (METRIC_NAMES, MetricVector, auc, cosine_similarity,
                      dichotomize, load_ground_truth, state_vector,
                      total_aggression)
from .minimize import (AdjacencyView, BamResult, BlockingConfig, HealingConfig,
                       PowerIterationError, aggression_adjacency, apply_healing,
                       heal_positive_seed, net_melt, net_shield, power_iteration,
                       run_bam, run_cam, weighted_adjacency)
from .seeding import SeedConfig, aggressive_set, select_seeds
from .weights import (WeightedGraph, apply_scheme, edge_power, jaccard_weight,
                      power_score, weighted_overlap)

__version__ = "0.1.0"
