"""End-to-end training, checkpointing and ranking evaluation."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import time
from dataclasses import dataclass, field, asdict

import numpy as np

from . import tensor as T
from . import graph as irm_graph
from . import fusion as fusion_mod
from . import ranking as ranking_mod
from .features import FeatureSet
from .fusion import FusionConfig, VARIANTS
from .optim import make_optimizer
from .params import ParamStore

CKPT_MAGIC = "IRMC1"


class DivergenceError(RuntimeError):
    """Training objective became non-finite."""


class EvaluationError(RuntimeError):
    pass


class CheckpointError(ValueError):
    pass


@dataclass
class TrainConfig:
    variant: str = "amnl"
    d: int = 16                 # joint representation / preference dim
    d_t: int = 16               # sentence embedding dim
    attn_dim: int = 8           # text attention hidden dim
    social_attn_dim: int = 8
    glimpse_hidden: int = 8
    glimpse_cell: str = "lstm"
    loc_scale: float = 1.0
    margin: float = 0.3
    optimizer: str = "adam"
    lr: float = 0.01
    lr_decay: float = 0.0       # inverse-time: lr / (1 + decay * (epoch - 1))
    batch_size: int = 32
    epochs: int = 30
    tuples_per_epoch: int = 0   # 0 -> 10x the number of train positives
    split_frac: float = 0.8
    seed: int = 0
    init_std: float = 0.1
    pref_init_mean: float = 0.0
    eval_negatives: int = 100
    workers: int = 1

    def validate(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant: {self.variant} (choose from {VARIANTS})")
        if not (0 < self.margin < 1):
            raise ValueError("margin must be in (0, 1)")
        if min(self.d, self.d_t, self.attn_dim, self.social_attn_dim,
               self.glimpse_hidden, self.batch_size, self.epochs) <= 0:
            raise ValueError("dims and loop sizes must be positive")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.lr_decay < 0:
            raise ValueError("lr_decay must be >= 0")


@dataclass
class EpochLog:
    epoch: int
    objective: float
    wall_seconds: float
    tuples: int


@dataclass
class EvalReport:
    precision_at: dict          # K -> value
    auc: float
    users: int
    per_user: list = field(default_factory=list)
    split_hash: str = ""

    def as_row(self):
        row = {f"precision_at_{k}": v for k, v in sorted(self.precision_at.items())}
        row["auc"] = self.auc
        row["users"] = self.users
        return row


class Model:
    """Bundles parameters with the dataset and dispatches variant forwards."""

    def __init__(self, tc: TrainConfig, net: irm_graph.IRMNetwork, feats: FeatureSet,
                 init_rng=None):
        tc.validate()
        self.tc = tc
        self.net = net
        self.global_ = np.asarray(feats.global_, dtype=np.float64)
        self.conv = np.asarray(feats.conv, dtype=np.float64)
        self.text = np.asarray(feats.text, dtype=np.float64)
        self.fcfg = FusionConfig(
            d=tc.d, d_f=self.global_.shape[1], d_t=tc.d_t,
            d_w=self.text.shape[3], attn_dim=tc.attn_dim,
            conv_shape=self.conv.shape[1:], k_ctx=self.text.shape[1],
            glimpse_hidden=tc.glimpse_hidden, glimpse_cell=tc.glimpse_cell,
            loc_scale=tc.loc_scale)
        self.margin = ranking_mod.Margin(tc.margin)
        self.store = ParamStore()
        rng = init_rng if init_rng is not None else np.random.default_rng(tc.seed)
        fusion_mod.init_fusion_params(self.store, self.fcfg, rng, tc.init_std)
        ranking_mod.init_ranking_params(self.store, net.n_users, tc.d,
                                        tc.social_attn_dim, rng, tc.init_std,
                                        tc.pref_init_mean)

    def tweet_z(self, i, cache=None):
        if cache is not None and i in cache:
            return cache[i]
        z = fusion_mod.tweet_repr(self.global_[i], self.conv[i],
                                  list(self.text[i]), self.store, self.fcfg,
                                  self.tc.variant)
        if cache is not None:
            cache[i] = z
        return z

    def score_tensor(self, j, i, cache=None, neighbors=None):
        z = self.tweet_z(i, cache)
        nbrs = self.net.followees[j] if neighbors is None else neighbors
        return ranking_mod.multifaceted_score(j, nbrs, z, self.store, self.tc.variant)

    def score(self, j, i, cache=None):
        return float(self.score_tensor(j, i, cache).data)

    def tuple_loss(self, t: irm_graph.RankTuple, cache=None):
        Fp = self.score_tensor(t.user, t.pos, cache, t.neighbors)
        Fn = self.score_tensor(t.user, t.neg, cache, t.neighbors)
        return ranking_mod.hinge_loss(Fp, Fn, self.margin)


# ---------------------------------------------------------------------------
# training

def train(tc: TrainConfig, net, feats, train_pos, out_dir=None, resume=None,
          log_fn=None):
    """Train over sampled tuples; returns (checkpoint dict, [EpochLog]).

    Deterministic for a given seed in single-worker mode: all randomness
    flows through one generator whose state rides along in checkpoints.
    """
    tc.validate()
    n_train_pos = sum(len(s) for s in train_pos)
    if n_train_pos == 0:
        raise ValueError("no training positives")
    tuples_per_epoch = tc.tuples_per_epoch or 10 * n_train_pos

    if resume is not None:
        model = Model(tc, net, feats)
        model.store.load_arrays(resume["params"])
        opt = make_optimizer(tc.optimizer, model.store, tc.lr)
        opt.load_state(resume["optimizer"])
        rng = np.random.default_rng()
        rng.bit_generator.state = resume["rng_state"]
        start_epoch = resume["epoch"]
    else:
        model = Model(tc, net, feats)
        opt = make_optimizer(tc.optimizer, model.store, tc.lr)
        rng = np.random.default_rng(tc.seed)
        start_epoch = 0

    sampler = irm_graph.TupleSampler(net, train_pos)
    # the logged objective is measured on a fixed probe tuple set so the
    # convergence curve tracks parameter movement, not per-epoch sampling
    probe_rng = np.random.default_rng([tc.seed, 0x9E3779B9])
    probe = [sampler.sample(probe_rng)
             for _ in range(min(tuples_per_epoch, 512))]
    logs = []
    for epoch in range(start_epoch + 1, tc.epochs + 1):
        opt.lr = tc.lr / (1.0 + tc.lr_decay * (epoch - 1))
        t0 = time.perf_counter()
        total = 0.0
        batch_losses = []
        cache = {}
        for step in range(tuples_per_epoch):
            t = sampler.sample(rng)
            loss = model.tuple_loss(t, cache)
            total += float(loss.data)
            batch_losses.append(loss)
            if len(batch_losses) >= tc.batch_size or step == tuples_per_epoch - 1:
                batch = T.scale(_sum_tensors(batch_losses), 1.0 / len(batch_losses))
                model.store.zero_grad()
                if float(batch.data) > 0.0:
                    T.backward(batch)
                opt.step()
                batch_losses = []
                cache = {}
        cache = {}
        objective = sum(float(model.tuple_loss(t, cache).data)
                        for t in probe) / len(probe)
        if not (np.isfinite(objective) and np.isfinite(total)):
            if out_dir:
                save_checkpoint(os.path.join(out_dir, "diverged.ckpt"),
                                model, opt, rng, epoch)
            raise DivergenceError(f"objective non-finite at epoch {epoch}")
        log = EpochLog(epoch, objective, time.perf_counter() - t0, tuples_per_epoch)
        logs.append(log)
        if log_fn:
            log_fn(log)

    ckpt = make_checkpoint(model, opt, rng, tc.epochs)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        save_checkpoint(os.path.join(out_dir, "model.ckpt"), model, opt, rng, tc.epochs)
        write_epoch_csv(os.path.join(out_dir, "epochs.csv"), logs)
    return ckpt, logs


def _sum_tensors(ts):
    acc = ts[0]
    for t in ts[1:]:
        acc = T.add(acc, t)
    return acc


def write_epoch_csv(path, logs):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("epoch,objective,wall_seconds,tuples\n")
        for lg in logs:
            fh.write(f"{lg.epoch},{lg.objective!r},{lg.wall_seconds!r},{lg.tuples}\n")


def read_epoch_csv(path):
    logs = []
    with open(path, "r", encoding="utf-8") as fh:
        next(fh)
        for line in fh:
            e, o, w, n = line.strip().split(",")
            logs.append(EpochLog(int(e), float(o), float(w), int(n)))
    return logs


# ---------------------------------------------------------------------------
# checkpoint file: JSON header line + concatenated float64 LE payloads

def make_checkpoint(model: Model, opt, rng, epoch):
    return {"config": asdict(model.tc),
            "epoch": epoch,
            "rng_state": rng.bit_generator.state,
            "params": model.store.state_arrays(),
            "optimizer": opt.state()}


def _flatten_opt_state(state):
    arrays = {}
    meta = {"t": state.get("t", 0)}
    for side in ("m", "v"):
        if side in state:
            for k, a in state[side].items():
                arrays[f"opt/{side}/{k}"] = a
    return meta, arrays


def save_checkpoint(path, model_or_ckpt, opt=None, rng=None, epoch=None):
    if isinstance(model_or_ckpt, Model):
        ckpt = make_checkpoint(model_or_ckpt, opt, rng, epoch)
    else:
        ckpt = model_or_ckpt
    opt_meta, opt_arrays = _flatten_opt_state(ckpt["optimizer"])
    arrays = dict(ckpt["params"])
    arrays.update(opt_arrays)
    names = list(arrays)
    header = {"magic": CKPT_MAGIC,
              "config": ckpt["config"],
              "epoch": ckpt["epoch"],
              "rng_state": _jsonable(ckpt["rng_state"]),
              "optimizer_meta": opt_meta,
              "tensors": [{"name": k, "shape": list(np.shape(arrays[k])),
                           "dtype": "f64le"} for k in names]}
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write((json.dumps(header) + "\n").encode("utf-8"))
        for k in names:
            fh.write(np.ascontiguousarray(arrays[k], dtype="<f8").tobytes())
    os.replace(tmp, path)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def load_checkpoint(path):
    with open(path, "rb") as fh:
        line = fh.readline()
        try:
            header = json.loads(line.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError):
            raise CheckpointError(f"{path}: unreadable header")
        if header.get("magic") != CKPT_MAGIC:
            raise CheckpointError(f"{path}: bad magic {header.get('magic')!r}")
        payload = fh.read()
    arrays = {}
    off = 0
    for spec in header["tensors"]:
        n = int(np.prod(spec["shape"], dtype=np.int64)) if spec["shape"] else 1
        nbytes = n * 8
        if off + nbytes > len(payload):
            raise CheckpointError(f"{path}: truncated payload for {spec['name']}")
        arrays[spec["name"]] = np.frombuffer(
            payload[off:off + nbytes], dtype="<f8").reshape(spec["shape"]).copy()
        off += nbytes
    if off != len(payload):
        raise CheckpointError(f"{path}: {len(payload) - off} trailing bytes")
    params = {k: v for k, v in arrays.items() if not k.startswith("opt/")}
    opt_state = {"t": header["optimizer_meta"].get("t", 0), "m": {}, "v": {}}
    for k, v in arrays.items():
        if k.startswith("opt/m/"):
            opt_state["m"][k[len("opt/m/"):]] = v
        elif k.startswith("opt/v/"):
            opt_state["v"][k[len("opt/v/"):]] = v
    if not opt_state["m"]:
        opt_state = {"t": opt_state["t"]}
    return {"config": header["config"], "epoch": header["epoch"],
            "rng_state": header["rng_state"], "params": params,
            "optimizer": opt_state}


def model_from_checkpoint(ckpt, net, feats):
    tc = TrainConfig(**ckpt["config"])
    model = Model(tc, net, feats)
    model.store.load_arrays(ckpt["params"])
    return model


# ---------------------------------------------------------------------------
# evaluation

def build_eval_pools(net, train_pos, test_pos, n_negatives, seed):
    """Per-user candidate pools: test positives plus sampled global negatives.

    Negatives have h=0 in the full H. Users without test positives are
    skipped. Returns {user: (sorted positives, sorted negatives)}.
    """
    rng = np.random.default_rng(seed)
    pools = {}
    for j in range(net.n_users):
        pos = sorted(test_pos[j])
        if not pos:
            continue
        neg_all = [t for t in range(net.n_tweets) if t not in net.pos_by_user[j]]
        if not neg_all:
            continue
        if len(neg_all) > n_negatives:
            idx = rng.choice(len(neg_all), n_negatives, replace=False)
            neg = sorted(neg_all[i] for i in idx)
        else:
            neg = neg_all
        pools[j] = (pos, neg)
    return pools


def _pool_scores(model: Model, pools):
    """Score every (user, candidate); joint z computed once per tweet."""
    cache = {}
    out = {}
    for j, (pos, neg) in pools.items():
        ps = np.array([model.score(j, t, cache) for t in pos])
        ns = np.array([model.score(j, t, cache) for t in neg])
        out[j] = (ps, ns)
    return out


def evaluate_auc(model: Model, pools, scores=None):
    """Mean per-user pairwise win rate of positives over negatives, ties 0.5."""
    if not pools:
        raise EvaluationError("no eligible users for evaluation")
    scores = scores or _pool_scores(model, pools)
    per_user = []
    for j in pools:
        ps, ns = scores[j]
        wins = (ps[:, None] > ns[None, :]).sum() + 0.5 * (ps[:, None] == ns[None, :]).sum()
        per_user.append(wins / (len(ps) * len(ns)))
    return float(np.mean(per_user))


def evaluate_precision_at_k(model: Model, pools, K, scores=None):
    """Mean over users of |top-K of the pool that are test positives| / K."""
    if K < 1:
        raise EvaluationError("K must be >= 1")
    if not pools:
        raise EvaluationError("no eligible users for evaluation")
    scores = scores or _pool_scores(model, pools)
    per_user = []
    for j, (pos, neg) in pools.items():
        if K > len(pos) + len(neg):
            raise EvaluationError(f"K={K} exceeds pool size for user {j}")
        ps, ns = scores[j]
        ranked = sorted([(t, s) for t, s in zip(pos, ps)] +
                        [(t, s) for t, s in zip(neg, ns)],
                        key=lambda ts: (-ts[1], ts[0]))
        hit = sum(1 for t, _ in ranked[:K] if t in set(pos))
        per_user.append(hit / K)
    return float(np.mean(per_user))


def split_hash(test_pos):
    pairs = sorted((j, t) for j, ts in enumerate(test_pos) for t in ts)
    return hashlib.sha256(json.dumps(pairs).encode()).hexdigest()[:16]


def evaluate(model: Model, net, train_pos, test_pos, ks=(1, 3), n_negatives=None,
             seed=None):
    tc = model.tc
    pools = build_eval_pools(net, train_pos, test_pos,
                             n_negatives if n_negatives is not None else tc.eval_negatives,
                             seed if seed is not None else tc.seed + 7919)
    scores = _pool_scores(model, pools)
    per_user = []
    for j, (pos, neg) in pools.items():
        per_user.append({"user": j, "positives": len(pos), "negatives": len(neg)})
    return EvalReport(
        precision_at={k: evaluate_precision_at_k(model, pools, k, scores) for k in ks},
        auc=evaluate_auc(model, pools, scores),
        users=len(pools), per_user=per_user, split_hash=split_hash(test_pos))


# ---------------------------------------------------------------------------
# ablations

def run_ablations(base_tc: TrainConfig, net, feats, seeds, variants=VARIANTS,
                  ks=(1, 3), log_fn=None):
    """Train/evaluate every variant on shared per-seed splits.

    Returns {"per_seed": {variant: [EvalReport...]}, "median": {variant: row},
    "errors": {variant: message}}.
    """
    per_seed = {v: [] for v in variants}
    errors = {}
    for seed in seeds:
        spec = irm_graph.SplitSpec(base_tc.split_frac, seed)
        train_pos, test_pos = irm_graph.split(net, spec)
        for variant in variants:
            tc = dataclasses.replace(base_tc, variant=variant, seed=seed)
            try:
                ckpt, _ = train(tc, net, feats, train_pos)
                model = model_from_checkpoint(ckpt, net, feats)
                rep = evaluate(model, net, train_pos, test_pos, ks=ks,
                               seed=seed + 7919)
                per_seed[variant].append(rep)
                if log_fn:
                    log_fn(variant, seed, rep)
            except Exception as exc:  # keep other variants running
                errors[variant] = f"seed {seed}: {exc}"
    median = {}
    for variant in variants:
        reps = per_seed[variant]
        if not reps:
            continue
        median[variant] = {
            "auc": float(np.median([r.auc for r in reps])),
            **{f"precision_at_{k}": float(np.median([r.precision_at[k] for r in reps]))
               for k in ks}}
    return {"per_seed": per_seed, "median": median, "errors": errors}
