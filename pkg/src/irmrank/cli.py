"""Command-line entry point: generate, train, eval, ablate, gradcheck, predict, report.

Exit codes: 0 success, 2 config/input error, 3 training divergence,
4 gradient-check failure. All randomness funnels through --seed; --workers 1
(the default and only implemented mode) is fully deterministic.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import os
import sys

import numpy as np

from . import graph as irm_graph
from . import pipeline
from .checks import variant_gradcheck
from .features import (SynthConfig, load_dataset, synth_generate,
                       validate_dataset, rank_size_exponent)
from .fusion import VARIANTS
from .pipeline import TrainConfig

log = logging.getLogger("irmrank")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3
EXIT_GRADCHECK = 4

GRADCHECK_TOL = 1e-4


class CliError(Exception):
    def __init__(self, msg, code=EXIT_CONFIG):
        super().__init__(msg)
        self.code = code


def _load_config_file(path, cls):
    """Read a JSON config into a dataclass; unknown keys are errors."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read config {path}: {exc}")
    if not isinstance(doc, dict):
        raise CliError(f"{path}: config must be a JSON object")
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(doc) - known
    if unknown:
        raise CliError(f"{path}: unknown config keys: {sorted(unknown)}")
    for key in ("conv_shape", "text_shape"):
        if key in doc:
            doc[key] = tuple(doc[key])
    return cls(**doc)


def _train_config(args):
    if args.config:
        tc = _load_config_file(args.config, TrainConfig)
    else:
        tc = TrainConfig()
    # flags win over the config file
    if args.seed is not None:
        tc.seed = args.seed
    if getattr(args, "variant", None):
        tc.variant = args.variant
    if getattr(args, "split_frac", None) is not None:
        tc.split_frac = args.split_frac
    if args.workers is not None:
        tc.workers = args.workers
    try:
        tc.validate()
    except ValueError as exc:
        raise CliError(str(exc))
    if tc.workers > 1:
        log.warning("multi-worker mode not implemented; running single-worker")
        tc.workers = 1
    return tc


def _load_manifest(args):
    if not args.manifest:
        raise CliError("--manifest is required")
    try:
        net, feats = load_dataset(args.manifest)
        validate_dataset(net, feats)
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot load dataset: {exc}")
    return net, feats


# ---------------------------------------------------------------------------
# subcommands

def cmd_generate(args):
    if args.config:
        cfg = _load_config_file(args.config, SynthConfig)
    else:
        cfg = SynthConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    try:
        cfg.validate()
        manifest, net, feats, _ = synth_generate(cfg, args.out)
    except ValueError as exc:
        raise CliError(str(exc))
    print(f"wrote {manifest}")
    print(f"tweets={net.n_tweets} users={net.n_users} "
          f"positives={net.n_positives()} follows={len(net.follow_edges())}")
    in_deg = np.zeros(net.n_users)
    for _, v in net.follow_edges():
        in_deg[v] += 1
    est = rank_size_exponent(in_deg)
    print(f"follow in-degree tail exponent: configured={cfg.follow_exponent} "
          f"estimated={est:.3f}")
    return EXIT_OK


def cmd_train(args):
    tc = _train_config(args)
    net, feats = _load_manifest(args)
    train_pos, test_pos = irm_graph.split(net, irm_graph.SplitSpec(tc.split_frac, tc.seed))
    os.makedirs(args.out, exist_ok=True)
    def log_fn(lg):
        print(f"epoch {lg.epoch}: objective={lg.objective:.6f} "
              f"wall={lg.wall_seconds:.2f}s", flush=True)
    try:
        ckpt, logs = pipeline.train(tc, net, feats, train_pos,
                                    out_dir=args.out, log_fn=log_fn)
    except pipeline.DivergenceError as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    print(f"final objective {logs[-1].objective:.6f} after {len(logs)} epochs; "
          f"checkpoint at {os.path.join(args.out, 'model.ckpt')}")
    return EXIT_OK


def _ks(args):
    try:
        return tuple(int(k) for k in args.k.split(","))
    except ValueError:
        raise CliError(f"bad --k list: {args.k!r}")


def cmd_eval(args):
    net, feats = _load_manifest(args)
    try:
        ckpt = pipeline.load_checkpoint(args.checkpoint)
        model = pipeline.model_from_checkpoint(ckpt, net, feats)
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot load checkpoint: {exc}")
    tc = model.tc
    frac = args.split_frac if args.split_frac is not None else tc.split_frac
    seed = args.seed if args.seed is not None else tc.seed
    train_pos, test_pos = irm_graph.split(net, irm_graph.SplitSpec(frac, seed))
    try:
        rep = pipeline.evaluate(model, net, train_pos, test_pos, ks=_ks(args))
    except pipeline.EvaluationError as exc:
        raise CliError(str(exc))
    row = rep.as_row()
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "eval.csv")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(row) + ["split_hash"])
        w.writeheader()
        w.writerow({**row, "split_hash": rep.split_hash})
    print(f"{'metric':<16}{'value':>10}")
    for k, v in row.items():
        print(f"{k:<16}{v:>10.4f}" if isinstance(v, float) else f"{k:<16}{v:>10}")
    print(f"report written to {path}")
    return EXIT_OK


def cmd_ablate(args):
    variants = tuple(args.variant.split(",")) if args.variant else VARIANTS
    args.variant = None   # run_ablations owns the variant axis
    tc = _train_config(args)
    net, feats = _load_manifest(args)
    seeds = [int(s) for s in args.seeds.split(",")]
    for v in variants:
        if v not in VARIANTS:
            raise CliError(f"unknown variant: {v}")
    def log_fn(variant, seed, rep):
        print(f"{variant} seed={seed}: auc={rep.auc:.4f} "
              f"p@1={rep.precision_at.get(1, float('nan')):.4f}", flush=True)
    result = pipeline.run_ablations(tc, net, feats, seeds, variants=variants,
                                    ks=_ks(args), log_fn=log_fn)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "ablation.csv")
    ks = _ks(args)
    fields = ["variant"] + [f"precision_at_{k}" for k in ks] + ["auc", "seeds", "split_hashes"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        for variant in variants:
            if variant not in result["median"]:
                continue
            med = result["median"][variant]
            w.writerow({"variant": variant, "auc": med["auc"],
                        **{f"precision_at_{k}": med[f"precision_at_{k}"] for k in ks},
                        "seeds": len(result["per_seed"][variant]),
                        "split_hashes": "|".join(r.split_hash
                                                 for r in result["per_seed"][variant])})
    for variant, msg in result["errors"].items():
        print(f"variant {variant} failed: {msg}", file=sys.stderr)
    print(f"ablation table written to {path}")
    return EXIT_OK


def cmd_gradcheck(args):
    tc = _train_config(args)
    if tc.d > 16:
        raise CliError("gradcheck requires small dims (d <= 16)")
    variants = tuple(args.variant.split(",")) if args.variant else VARIANTS
    os.makedirs(args.out, exist_ok=True)
    failed = []
    for variant in variants:
        if variant not in VARIANTS:
            raise CliError(f"unknown variant: {variant}")
        report = variant_gradcheck(variant, args.out, seed=tc.seed,
                                   d=min(tc.d, 8), d_t=min(tc.d_t, 6),
                                   corrupt_param=args.corrupt_param)
        worst_name = max(report, key=report.get)
        worst = report[worst_name]
        status = "PASS" if worst <= GRADCHECK_TOL else "FAIL"
        print(f"{variant:<12} {status}  max_rel_err={worst:.3e}  ({worst_name})")
        if status == "FAIL":
            failed.append((variant, worst_name))
    if failed:
        for variant, name in failed:
            print(f"gradcheck failed: {variant} parameter {name}", file=sys.stderr)
        return EXIT_GRADCHECK
    return EXIT_OK


def cmd_predict(args):
    net, feats = _load_manifest(args)
    try:
        ckpt = pipeline.load_checkpoint(args.checkpoint)
        model = pipeline.model_from_checkpoint(ckpt, net, feats)
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot load checkpoint: {exc}")
    j = args.user
    if not (0 <= j < net.n_users):
        raise CliError(f"unknown user id: {j}")
    K = _ks(args)[0]
    candidates = [t for t in range(net.n_tweets) if t not in net.pos_by_user[j]]
    if not candidates:
        raise CliError(f"user {j} has no candidate tweets")
    from .ranking import rank_tweets_for_user
    cache = {}
    ranked = rank_tweets_for_user(j, candidates,
                                  lambda u, t: model.score(u, t, cache))
    print("rank,tweet_id,score")
    for rank, (t, s) in enumerate(ranked[:K], 1):
        print(f"{rank},{t},{s!r}")
    return EXIT_OK


def cmd_report(args):
    run_dir = args.run_dir
    epochs_path = os.path.join(run_dir, "epochs.csv")
    ablation_path = os.path.join(run_dir, "ablation.csv")
    if not os.path.exists(epochs_path) and not os.path.exists(ablation_path):
        raise CliError(f"no epochs.csv or ablation.csv under {run_dir}")
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    out = args.out or run_dir
    os.makedirs(out, exist_ok=True)
    wrote = []
    if os.path.exists(epochs_path):
        logs = pipeline.read_epoch_csv(epochs_path)
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot([lg.epoch for lg in logs], [lg.objective for lg in logs], marker="o", ms=3)
        ax.set_xlabel("epoch")
        ax.set_ylabel("mean ranking objective")
        ax.set_title("training objective")
        fig.tight_layout()
        path = os.path.join(out, "objective.svg")
        fig.savefig(path)
        plt.close(fig)
        wrote.append(path)
        copy = os.path.join(out, "objective.csv")
        pipeline.write_epoch_csv(copy, logs)
        wrote.append(copy)
    if os.path.exists(ablation_path):
        with open(ablation_path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        if rows:
            fig, ax = plt.subplots(figsize=(7, 4))
            names = [r["variant"] for r in rows]
            aucs = [float(r["auc"]) for r in rows]
            ax.bar(names, aucs)
            ax.set_ylabel("AUC (median over seeds)")
            ax.set_title("ablation variants")
            ax.set_ylim(0, 1)
            fig.tight_layout()
            path = os.path.join(out, "ablation.svg")
            fig.savefig(path)
            plt.close(fig)
            wrote.append(path)
    for p in wrote:
        print(f"wrote {p}")
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="irmrank",
                                description="Image retweet ranking toolkit")
    p.add_argument("--log-level", default=os.environ.get("IRM_RANK_LOG", "WARNING"))
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, manifest=False, checkpoint=False, out=True):
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--workers", type=int, default=None)
        if manifest:
            sp.add_argument("--manifest", help="dataset manifest JSON")
        if checkpoint:
            sp.add_argument("--checkpoint", required=True)
        if out:
            sp.add_argument("--out", default="runs/out", help="output directory")

    sp = sub.add_parser("generate", help="generate a synthetic planted dataset")
    common(sp)
    sp.set_defaults(fn=cmd_generate)

    sp = sub.add_parser("train", help="train a variant on a dataset")
    common(sp, manifest=True)
    sp.add_argument("--variant", choices=VARIANTS)
    sp.add_argument("--split-frac", type=float, default=None)
    sp.set_defaults(fn=cmd_train)

    sp = sub.add_parser("eval", help="evaluate a checkpoint")
    common(sp, manifest=True, checkpoint=True)
    sp.add_argument("--split-frac", type=float, default=None)
    sp.add_argument("--k", default="1,3", help="comma-separated K list")
    sp.set_defaults(fn=cmd_eval)

    sp = sub.add_parser("ablate", help="train/evaluate the ablation matrix")
    common(sp, manifest=True)
    sp.add_argument("--variant", help="comma-separated variant subset")
    sp.add_argument("--split-frac", type=float, default=None)
    sp.add_argument("--seeds", default="0,1,2,3,4")
    sp.add_argument("--k", default="1,3")
    sp.set_defaults(fn=cmd_ablate)

    sp = sub.add_parser("gradcheck", help="finite-difference check per variant")
    common(sp)
    sp.add_argument("--variant", help="comma-separated variant subset")
    sp.add_argument("--corrupt-param", help="test hook: fault-inject this parameter")
    sp.set_defaults(fn=cmd_gradcheck)

    sp = sub.add_parser("predict", help="top-K tweets for one user")
    common(sp, manifest=True, checkpoint=True, out=False)
    sp.add_argument("--user", type=int, required=True)
    sp.add_argument("--k", default="10")
    sp.set_defaults(fn=cmd_predict)

    sp = sub.add_parser("report", help="emit SVG/CSV artifacts for a run")
    sp.add_argument("--run-dir", required=True)
    sp.add_argument("--out", default=None)
    sp.set_defaults(fn=cmd_report)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level.upper(), logging.WARNING))
    try:
        return args.fn(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
