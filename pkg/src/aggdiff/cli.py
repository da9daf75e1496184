"""Experiment runner: declarative configs, replicate management, CSV/JSON output.

Verbs: ``model`` (plain diffusion), ``cam`` (competitive healing), ``bam``
(spectral blocking), ``casestudy`` (label prediction AUC), and
``validate-config``.  Options resolve as CLI > config file > defaults; the
resolved configuration is echoed to ``<out>/manifest.txt`` in the same
``key = value`` format, so re-running from a manifest reproduces the run.

Exit codes: 0 success, 1 config error, 2 I/O or data-format error,
3 numerical failure.
"""

import argparse
import concurrent.futures
import json
import logging
import os
import sys

import numpy as np

from . import cascade as cas
from . import graph as gr
from . import metrics as me
from . import minimize as mi
from . import seeding as se
from . import weights as we

logger = logging.getLogger(__name__)

MODES = ("model", "cam", "bam", "casestudy", "validate-config")

# key -> (type, default); None default means optional/unset
_SCHEMA = {
    "mode": (str, None),
    "graph": (str, None),
    "scores": (str, None),
    "ground_truth": (str, None),
    "t1_labels": (str, None),
    "weighting": (str, "jaccard"),
    "seed_strategy": (str, "sd"),
    "k": (int, 100),
    "percentile": (str, "nonzero"),
    "dd_probability": (float, 0.01),
    "model": (str, "ic"),
    "activation": (str, "cumulative"),
    "threshold": (str, "aggression"),
    "lt_agg": (str, "sum"),
    "max_steps": (int, None),
    "healing": (str, "decaying"),
    "pos_seed_strategy": (str, "random"),
    "pos_k": (int, 0),
    "blocking": (str, "nodes"),
    "adjacency": (str, "jaccard"),
    "remove_k": (int, 0),
    "power_iter_tol": (float, 1e-9),
    "power_iter_max": (int, 10000),
    "ta": (float, me.DEFAULT_TA),
    "replicates": (int, 1),
    "seed_replicates": (int, 1),
    "rng_seed": (int, 0),
    "jobs": (int, 1),
    "scc": (bool, True),
    "out": (str, None),
}

_ENUMS = {
    "weighting": we.SCHEMES,
    "seed_strategy": se.STRATEGIES,
    "model": cas.MODELS,
    "activation": cas.ACTIVATION_CRITERIA,
    "threshold": cas.THRESHOLD_STRATEGIES,
    "lt_agg": cas.LT_AGGREGATIONS,
    "healing": mi.MECHANISMS,
    "pos_seed_strategy": se.STRATEGIES,
    "blocking": mi.BLOCK_TARGETS,
    "adjacency": mi.ADJACENCIES,
}


class ConfigError(ValueError):
    pass


def _coerce(key, raw):
    typ, _ = _SCHEMA[key]
    if raw is None:
        return None
    if typ is bool:
        if isinstance(raw, bool):
            return raw
        if str(raw).lower() in ("1", "true", "yes", "on"):
            return True
        if str(raw).lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"config key '{key}': expected a boolean, got {raw!r}")
    try:
        return typ(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"config key '{key}': expected {typ.__name__}, got {raw!r}") from None


def load_config_file(path):
    """Flat key=value file; '#' starts a comment, keys use underscores."""
    out = {}
    try:
        fh = open(path)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    with fh:
        for lineno, line in enumerate(fh, 1):
            s = line.split("#", 1)[0].strip()
            if not s:
                continue
            if "=" not in s:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, val = (x.strip() for x in s.split("=", 1))
            key = key.replace("-", "_")
            if key not in _SCHEMA:
                raise ConfigError(f"{path}:{lineno}: unknown config key '{key}'")
            out[key] = val
    return out


def resolve_config(mode, cli_pairs, config_path=None):
    """Merge CLI > file > defaults into a fully-typed config dict."""
    file_vals = load_config_file(config_path) if config_path else {}
    if "mode" in file_vals and file_vals["mode"] != mode:
        raise ConfigError(f"config key 'mode': file says {file_vals['mode']!r}, "
                          f"command says {mode!r}")
    cfg = {}
    for key, (_, default) in _SCHEMA.items():
        if key in cli_pairs and cli_pairs[key] is not None:
            cfg[key] = _coerce(key, cli_pairs[key])
        elif key in file_vals:
            cfg[key] = _coerce(key, file_vals[key])
        else:
            cfg[key] = default
    cfg["mode"] = mode
    _validate(cfg)
    return cfg


def _validate(cfg):
    mode = cfg["mode"]
    if mode not in MODES:
        raise ConfigError(f"config key 'mode': unknown mode {cfg['mode']!r}")
    for key, allowed in _ENUMS.items():
        if cfg[key] is not None and cfg[key] not in allowed:
            raise ConfigError(f"config key '{key}': {cfg[key]!r} not in {allowed}")
    if mode == "validate-config":
        return
    for key in ("graph", "scores", "out"):
        if key == "scores" and mode == "casestudy":
            pass  # casestudy uses 'scores' as the t0 state; still required
        if not cfg[key]:
            raise ConfigError(f"config key '{key}' is required for mode {mode}")
    if mode == "casestudy" and not cfg["t1_labels"]:
        raise ConfigError("config key 't1_labels' is required for mode casestudy")
    for key in ("k", "replicates", "seed_replicates", "jobs"):
        if cfg[key] <= 0:
            raise ConfigError(f"config key '{key}' must be positive")
    for key in ("pos_k", "remove_k"):
        if cfg[key] < 0:
            raise ConfigError(f"config key '{key}' must be >= 0")
    if not 0.0 < cfg["ta"] < 1.0:
        raise ConfigError("config key 'ta' must be in (0,1)")
    if cfg["percentile"] != "nonzero":
        try:
            pct = float(cfg["percentile"])
        except ValueError:
            raise ConfigError("config key 'percentile' must be a number or 'nonzero'") from None
        if not 0.0 <= pct <= 100.0:
            raise ConfigError("config key 'percentile' must be in [0,100]")


def write_manifest(cfg, path):
    with open(path, "w") as fh:
        for key in sorted(cfg):
            val = cfg[key]
            if val is None:
                continue
            if isinstance(val, bool):
                val = "true" if val else "false"
            elif isinstance(val, float):
                val = f"{val:.17g}"
            fh.write(f"{key} = {val}\n")


def _cascade_config(cfg, seed):
    if cfg["model"] == "ic":
        return cas.CascadeConfig(model="ic", activation_criterion=cfg["activation"],
                                 max_steps=cfg["max_steps"], rng_seed=seed)
    return cas.CascadeConfig(model="lt", threshold_strategy=cfg["threshold"],
                             lt_aggregation=cfg["lt_agg"],
                             max_steps=cfg["max_steps"], rng_seed=seed)


def _seed_config(cfg, strategy_key, k_key, seed):
    pct = cfg["percentile"]
    if pct != "nonzero":
        pct = float(pct)
    return se.SeedConfig(strategy=cfg[strategy_key], budget_k=cfg[k_key],
                         aggressive_percentile=pct,
                         dd_probability=cfg["dd_probability"], rng_seed=seed)


def _load_inputs(cfg):
    g = gr.load_edge_list(cfg["graph"])
    if cfg["scc"]:
        g = gr.largest_scc(g)
    state0 = gr.load_scores(cfg["scores"], g)
    wg = we.apply_scheme(g, cfg["weighting"], rng_seed=cfg["rng_seed"])
    gt = me.load_ground_truth(cfg["ground_truth"]) if cfg["ground_truth"] else None
    return g, state0, wg, gt


def _run_one(cfg, g, state0, wg, run_idx, cascade_seed, seeding_seed):
    """Execute a single replicate; returns artifacts for the collector."""
    mode = cfg["mode"]
    ccfg = _cascade_config(cfg, cascade_seed)
    scfg = _seed_config(cfg, "seed_strategy", "k", seeding_seed)
    out = {"replicate": run_idx, "cascade_seed": cascade_seed,
           "seeding_seed": seeding_seed}
    if mode == "bam":
        blocking = mi.BlockingConfig(target=cfg["blocking"], budget_k=cfg["remove_k"],
                                     adjacency=cfg["adjacency"],
                                     power_iter_tol=cfg["power_iter_tol"],
                                     power_iter_max=cfg["power_iter_max"])
        result = mi.run_bam(wg, state0, blocking, ccfg, scfg)
        out["trace"] = result.trace
        out["baseline"] = result.baseline_trace
        out["removed"] = result.removed
        return out
    seeds = se.select_seeds(wg, state0, scfg)
    if mode == "cam":
        pos_cfg = (None if cfg["pos_k"] == 0 else
                   _seed_config(cfg, "pos_seed_strategy", "pos_k", seeding_seed))
        healing = mi.HealingConfig(mechanism=cfg["healing"],
                                   positive_seed_strategy=pos_cfg,
                                   rng_seed=cascade_seed)
        out["trace"] = mi.run_cam(wg, state0, seeds, healing, ccfg)
        baseline_healing = mi.HealingConfig(mechanism=cfg["healing"],
                                            positive_seed_strategy=None,
                                            rng_seed=cascade_seed)
        out["baseline"] = mi.run_cam(wg, state0, seeds, baseline_healing, ccfg)
    else:
        out["trace"] = cas.run_cascade(wg, state0, seeds, ccfg)
    return out


def _emit_run(cfg, g, gt, res, out_dir):
    idx = res["replicate"]
    trace = res["trace"]
    suffix = f"rep{idx:03d}"
    cas.save_trace_csv(trace, g, os.path.join(out_dir, f"trace_{suffix}.csv"))
    cas.save_step_summary_csv(trace, os.path.join(out_dir, f"steps_{suffix}.csv"))
    vectors = cas.snapshot_trace(trace, g, cfg["ta"])
    me.save_metrics_csv(vectors, os.path.join(out_dir, f"metrics_{suffix}.csv"),
                        cosine_against=gt)
    summary = {
        "replicate": idx,
        "cascade_seed": res["cascade_seed"],
        "seeding_seed": res["seeding_seed"],
        "steps": len(trace.steps),
        "activated_count": trace.activated_count,
        "total_aggression": [float(x) for x in trace.step_totals],
        "terminal_total_aggression": float(trace.step_totals[-1]),
        "terminal_cosine": (me.cosine_similarity(vectors[-1], gt)
                            if gt is not None else None),
    }
    if "baseline" in res:
        baseline = res["baseline"]
        mi.save_reduction_csv(trace, baseline,
                              os.path.join(out_dir, f"reduction_{suffix}.csv"))
        base_total = float(baseline.step_totals[-1])
        summary["baseline_total_aggression"] = base_total
        summary["reduction_ratio_terminal"] = (
            float(trace.step_totals[-1]) / base_total if base_total else None)
        summary["positive_count"] = trace.positive_count
    if "removed" in res:
        mi.save_removed(res["removed"], g,
                        os.path.join(out_dir, f"removed_{suffix}.txt"))
        summary["removed_count"] = int(np.asarray(res["removed"]).shape[0])
    return summary


def _aggregate(summaries):
    agg = {}
    counts = np.array([s["activated_count"] for s in summaries], dtype=np.float64)
    totals = np.array([s["terminal_total_aggression"] for s in summaries])
    agg["activated_count_mean"] = float(counts.mean())
    agg["activated_count_std"] = float(counts.std())
    agg["terminal_total_aggression_mean"] = float(totals.mean())
    agg["terminal_total_aggression_std"] = float(totals.std())
    cosines = [s["terminal_cosine"] for s in summaries if s.get("terminal_cosine") is not None]
    if cosines:
        agg["terminal_cosine_mean"] = float(np.mean(cosines))
        agg["terminal_cosine_std"] = float(np.std(cosines))
    ratios = [s["reduction_ratio_terminal"] for s in summaries
              if s.get("reduction_ratio_terminal") is not None]
    if ratios:
        agg["reduction_ratio_mean"] = float(np.mean(ratios))
    agg["identical_replicates"] = bool(
        len({(s["activated_count"], s["terminal_total_aggression"]) for s in summaries}) == 1)
    return agg


def run_experiment(cfg):
    """Full pipeline for modes model/cam/bam; returns the summary dict."""
    out_dir = cfg["out"]
    os.makedirs(out_dir, exist_ok=True)
    g, state0, wg, gt = _load_inputs(cfg)
    write_manifest(cfg, os.path.join(out_dir, "manifest.txt"))

    runs = []
    idx = 0
    for i in range(cfg["replicates"]):
        for j in range(cfg["seed_replicates"]):
            runs.append((idx, cfg["rng_seed"] + i, cfg["rng_seed"] + 7919 * j))
            idx += 1

    def work(args):
        run_idx, cseed, sseed = args
        return _run_one(cfg, g, state0, wg, run_idx, cseed, sseed)

    if cfg["jobs"] > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=cfg["jobs"]) as pool:
            results = list(pool.map(work, runs))
    else:
        results = [work(r) for r in runs]

    summaries = [_emit_run(cfg, g, gt, res, out_dir) for res in results]
    summary = {
        "mode": cfg["mode"],
        "graph": {"nodes": g.n_nodes, "edges": g.edge_count},
        "runs": len(runs),
        "per_replicate": summaries,
        "aggregate": _aggregate(summaries),
    }
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


def case_study(cfg):
    """Run the configured model from t0 scores and score AUC against t1 labels."""
    out_dir = cfg["out"]
    os.makedirs(out_dir, exist_ok=True)
    g, state0, wg, _ = _load_inputs(cfg)
    labels = gr.load_labels(cfg["t1_labels"], g)
    if not labels.any() or labels.all():
        raise ConfigError("t1 labels contain a single class; AUC undefined")
    write_manifest(cfg, os.path.join(out_dir, "manifest.txt"))

    per_run = []
    idx = 0
    for i in range(cfg["replicates"]):
        for j in range(cfg["seed_replicates"]):
            ccfg = _cascade_config(cfg, cfg["rng_seed"] + i)
            scfg = _seed_config(cfg, "seed_strategy", "k", cfg["rng_seed"] + 7919 * j)
            seeds = se.select_seeds(wg, state0, scfg)
            trace = cas.run_cascade(wg, state0, seeds, ccfg)
            auc_val = me.auc(trace.terminal_state.score, labels)
            per_run.append({"replicate": idx, "cascade_seed": cfg["rng_seed"] + i,
                            "seeding_seed": cfg["rng_seed"] + 7919 * j,
                            "auc": float(auc_val)})
            idx += 1
    summary = {
        "mode": "casestudy",
        "graph": {"nodes": g.n_nodes, "edges": g.edge_count},
        "runs": len(per_run),
        "per_replicate": per_run,
        "aggregate": {"auc_mean": float(np.mean([r["auc"] for r in per_run])),
                      "auc_std": float(np.std([r["auc"] for r in per_run]))},
    }
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


def build_parser():
    parser = argparse.ArgumentParser(
        prog="aggdiff",
        description="Aggression diffusion modeling and minimization experiments.")
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        p = sub.add_parser(mode)
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--graph")
        p.add_argument("--scores")
        p.add_argument("--ground-truth", dest="ground_truth")
        p.add_argument("--t1-labels", dest="t1_labels")
        p.add_argument("--weighting", choices=we.SCHEMES)
        p.add_argument("--seed-strategy", dest="seed_strategy", choices=se.STRATEGIES)
        p.add_argument("--k")
        p.add_argument("--percentile")
        p.add_argument("--dd-probability", dest="dd_probability")
        p.add_argument("--model", choices=cas.MODELS)
        p.add_argument("--activation", choices=cas.ACTIVATION_CRITERIA)
        p.add_argument("--threshold", choices=cas.THRESHOLD_STRATEGIES)
        p.add_argument("--lt-agg", dest="lt_agg", choices=cas.LT_AGGREGATIONS)
        p.add_argument("--max-steps", dest="max_steps")
        p.add_argument("--healing", choices=mi.MECHANISMS)
        p.add_argument("--pos-seed-strategy", dest="pos_seed_strategy",
                       choices=se.STRATEGIES)
        p.add_argument("--pos-k", dest="pos_k")
        p.add_argument("--blocking", choices=mi.BLOCK_TARGETS)
        p.add_argument("--adjacency", choices=mi.ADJACENCIES)
        p.add_argument("--remove-k", dest="remove_k")
        p.add_argument("--power-iter-tol", dest="power_iter_tol")
        p.add_argument("--power-iter-max", dest="power_iter_max")
        p.add_argument("--ta")
        p.add_argument("--replicates")
        p.add_argument("--seed-replicates", dest="seed_replicates")
        p.add_argument("--rng-seed", dest="rng_seed")
        p.add_argument("--jobs")
        p.add_argument("--out")
        p.add_argument("--no-scc", dest="scc", action="store_false", default=None)
    return parser


def main(argv=None):
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    cli_pairs = {k: v for k, v in vars(args).items() if k not in ("mode", "config")}
    try:
        cfg = resolve_config(args.mode, cli_pairs, args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    if args.mode == "validate-config":
        for key in sorted(cfg):
            if cfg[key] is not None:
                print(f"{key} = {cfg[key]}")
        return 0
    try:
        if args.mode == "casestudy":
            summary = case_study(cfg)
        else:
            summary = run_experiment(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except mi.PowerIterationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (gr.DataFormatError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(summary["aggregate"], sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
