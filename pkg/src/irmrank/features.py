"""Multimodal feature interchange files and the synthetic dataset generator.

File format (IRMF1): one JSON header line, UTF-8, then a raw little-endian
float32 payload in row-major order. Header fields: magic "IRMF1", kind
("global" | "conv" | "text"), count, dims, dtype "f32le". The payload holds
`count` records of shape `dims`; record index == tweet id.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, asdict, field

import numpy as np

from . import graph as irm_graph

MAGIC = "IRMF1"

# record rank per kind: global image vector, conv feature map, word sequences
KIND_RANK = {"global": 1, "conv": 3, "text": 3}

PAPER_DIMS = {"global": (1536,), "conv": (8, 8, 1536), "text": (4, 12, 300)}


class FormatError(ValueError):
    """Header/payload inconsistency, reported with a byte offset when known."""


class ValidationError(ValueError):
    """Dataset-level inconsistency (missing features, dim mismatch)."""


def write_features(path, kind, array):
    """Write a (count, *dims) array as an IRMF1 file; bit-exact float32 payload."""
    if kind not in KIND_RANK:
        raise FormatError(f"unknown kind: {kind}")
    arr = np.ascontiguousarray(array, dtype="<f4")
    if arr.ndim != KIND_RANK[kind] + 1:
        raise FormatError(f"kind={kind} expects record rank {KIND_RANK[kind]}, "
                          f"got array of shape {arr.shape}")
    header = {"magic": MAGIC, "kind": kind, "count": arr.shape[0],
              "dims": list(arr.shape[1:]), "dtype": "f32le"}
    with open(path, "wb") as fh:
        fh.write((json.dumps(header) + "\n").encode("utf-8"))
        fh.write(arr.tobytes())


def read_features(path, kind=None):
    """Read an IRMF1 file; returns a float32 array of shape (count, *dims)."""
    with open(path, "rb") as fh:
        line = fh.readline()
        try:
            header = json.loads(line.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError):
            raise FormatError(f"{path}: unreadable header at byte 0")
        offset = len(line)
        if header.get("magic") != MAGIC:
            raise FormatError(f"{path}: bad magic at byte 0: {header.get('magic')!r}")
        if header.get("dtype") != "f32le":
            raise FormatError(f"{path}: unsupported dtype {header.get('dtype')!r}")
        fkind = header.get("kind")
        if fkind not in KIND_RANK:
            raise FormatError(f"{path}: unknown kind {fkind!r}")
        if kind is not None and fkind != kind:
            raise FormatError(f"{path}: expected kind={kind}, file says {fkind}")
        dims = tuple(int(d) for d in header.get("dims", []))
        count = int(header.get("count", -1))
        if count < 0 or any(d <= 0 for d in dims):
            raise FormatError(f"{path}: bad count/dims in header")
        if len(dims) != KIND_RANK[fkind]:
            raise FormatError(f"{path}: kind={fkind} requires rank-{KIND_RANK[fkind]} "
                              f"records, header dims {list(dims)}")
        expected = count * int(np.prod(dims, dtype=np.int64)) * 4
        payload = fh.read()
        if len(payload) != expected:
            raise FormatError(f"{path}: payload length {len(payload)} bytes at offset "
                              f"{offset}, expected {expected}")
    arr = np.frombuffer(payload, dtype="<f4").reshape((count,) + dims)
    if not np.all(np.isfinite(arr)):
        raise FormatError(f"{path}: non-finite payload values")
    return arr


@dataclass
class FeatureSet:
    """In-memory multimodal features, indexed by tweet id."""
    global_: np.ndarray   # (n, d_f)
    conv: np.ndarray      # (n, H_c, W_c, S)
    text: np.ndarray      # (n, k_ctx, L, d_w)

    @property
    def count(self):
        return self.global_.shape[0]

    def dims(self):
        return {"global": list(self.global_.shape[1:]),
                "conv": list(self.conv.shape[1:]),
                "text": list(self.text.shape[1:])}


def write_manifest(path, graph_file, global_file, conv_file, text_file, dims,
                   extra=None):
    doc = {"format": MAGIC, "graph": graph_file, "global": global_file,
           "conv": conv_file, "text": text_file, "dims": dims}
    if extra:
        doc["extra"] = extra
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_dataset(manifest_path):
    """Load (network, features) from a dataset manifest."""
    base = os.path.dirname(os.path.abspath(manifest_path))
    with open(manifest_path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != MAGIC:
        raise FormatError(f"{manifest_path}: not an {MAGIC} manifest")
    def p(key):
        return os.path.join(base, doc[key])
    net = irm_graph.read_graph(p("graph"))
    feats = FeatureSet(global_=read_features(p("global"), "global"),
                       conv=read_features(p("conv"), "conv"),
                       text=read_features(p("text"), "text"))
    return net, feats


def validate_dataset(net: irm_graph.IRMNetwork, feats: FeatureSet):
    """Check every tweet in H has all three feature kinds with consistent dims."""
    missing = [t for t in range(net.n_tweets) if t >= feats.count]
    counts = {feats.global_.shape[0], feats.conv.shape[0], feats.text.shape[0]}
    if len(counts) != 1:
        raise ValidationError(f"feature counts disagree: {sorted(counts)}")
    if missing:
        raise ValidationError(f"tweets missing features: {missing}")
    if feats.conv.shape[1] < 3 or feats.conv.shape[2] < 3:
        raise ValidationError("conv grid must be at least 3x3")
    return {"ok": True, "tweets": net.n_tweets, "users": net.n_users,
            "dims": feats.dims()}


# ---------------------------------------------------------------------------
# synthetic planted-preference generator

@dataclass
class SynthConfig:
    n_users: int = 50
    n_tweets: int = 200
    latent_dim: int = 16
    noise: float = 0.1
    positives_per_user: int = 8
    follow_exponent: float = 2.5    # tail exponent of the follow-degree law
    followees_per_user: int = 5
    homophily: float = 2.0          # similarity weighting of follow edges
    noise_image: float = None       # per-channel override; None = `noise`
    noise_text: float = None
    seed: int = 0
    d_f: int = 32                   # global image feature dim
    conv_shape: tuple = (4, 4, 8)   # (H_c, W_c, S)
    text_shape: tuple = (2, 6, 16)  # (k_ctx, L, d_w)
    conv_mode: str = "broadcast"    # "broadcast" | "localized"

    def validate(self):
        if min(self.n_users, self.n_tweets, self.latent_dim,
               self.positives_per_user, self.followees_per_user, self.d_f) <= 0:
            raise ValueError("all counts must be positive")
        if self.follow_exponent <= 1:
            raise ValueError("follow_exponent must be > 1")
        if self.positives_per_user >= self.n_tweets:
            raise ValueError("positives_per_user must be < n_tweets")
        if self.conv_mode not in ("broadcast", "localized"):
            raise ValueError(f"unknown conv_mode: {self.conv_mode}")


def synth_generate(cfg: SynthConfig, out_dir):
    """Generate a planted-preference dataset and write all artifact files.

    Latents r*_j (users) and t*_i (tweets) are standard normal; user j reposts
    their top-q tweets by r*.t*. Both the image channel (global + conv) and
    the text channel carry linear projections of t* plus Gaussian noise, so
    either modality alone can recover the planted preferences.
    Returns (manifest_path, network, features, latents dict).
    """
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    m, n, d = cfg.n_users, cfg.n_tweets, cfg.latent_dim

    r_star = rng.standard_normal((m, d))
    t_star = rng.standard_normal((n, d))
    # constant-norm tweet latents: popularity is driven by direction, not
    # magnitude, so an untrained scorer has no norm shortcut to exploit
    t_star *= np.sqrt(d) / np.linalg.norm(t_star, axis=1, keepdims=True)

    scores = r_star @ t_star.T                      # (m, n)
    q = cfg.positives_per_user
    retweets = []
    for j in range(m):
        top = np.argsort(-scores[j], kind="stable")[:q]
        retweets.extend((int(t), j) for t in top)

    # Follow edges: static attachment weights w_r ~ r^(-1/(gamma-1)) give the
    # in-degree rank-size slope of the configured tail exponent; a homophily
    # factor tilts each user's choices toward users with similar latents, so
    # neighbor preferences carry signal about the follower's own taste.
    b = 1.0 / (cfg.follow_exponent - 1.0)
    attract = (np.arange(1, m + 1, dtype=np.float64)) ** (-b)
    attract = attract[rng.permutation(m)]
    r_unit = r_star / np.linalg.norm(r_star, axis=1, keepdims=True)
    follows = []
    for j in range(m):
        sim = r_unit @ r_unit[j]
        w = attract * np.exp(cfg.homophily * sim)
        w[j] = 0.0
        w /= w.sum()
        k = min(cfg.followees_per_user, m - 1)
        targets = rng.choice(m, size=k, replace=False, p=w)
        follows.extend((j, int(v)) for v in targets)

    net = irm_graph.build_graph(retweets, follows, n_tweets=n, n_users=m)

    # Feature channels: fixed random linear maps of the tweet latents.
    # In broadcast mode every channel sees the full latent. In localized
    # mode the global vector carries the first half while the second half
    # lives in the conv map's central 2x2 block (text keeps the full
    # latent), so part of the image signal is reachable only by reading
    # that region.
    sig_img = cfg.noise if cfg.noise_image is None else cfg.noise_image
    sig_txt = cfg.noise if cfg.noise_text is None else cfg.noise_text
    localized = cfg.conv_mode == "localized"
    dh = max(1, d // 2)

    A = rng.standard_normal((cfg.d_f, d)) / np.sqrt(d)
    if localized:
        A[:, dh:] = 0.0
    global_ = t_star @ A.T + sig_img * rng.standard_normal((n, cfg.d_f))

    Hc, Wc, S = cfg.conv_shape
    B = rng.standard_normal((S, d)) / np.sqrt(d)
    if localized:
        B[:, :dh] = 0.0
    cell_signal = t_star @ B.T                      # (n, S)
    conv = sig_img * rng.standard_normal((n, Hc, Wc, S))
    if not localized:
        conv += cell_signal[:, None, None, :]
    else:
        # the conv-exclusive signal concentrates in the central block
        # (amplitude scaled by grid/4) while the remaining cells carry
        # strong tweet-specific clutter with no preference content, so
        # spatial mean pooling drowns what a focused read recovers
        r0, c0 = Hc // 2 - 1, Wc // 2 - 1
        amp = Hc * Wc / 4.0
        conv[:, r0:r0 + 2, c0:c0 + 2, :] += amp * cell_signal[:, None, None, :]
        bg = np.ones((Hc, Wc), dtype=bool)
        bg[r0:r0 + 2, c0:c0 + 2] = False
        conv[:, bg, :] += amp * rng.standard_normal((n, int(bg.sum()), S))

    k_ctx, L, d_w = cfg.text_shape
    C = rng.standard_normal((k_ctx * L * d_w, d)) / np.sqrt(d)
    text = (t_star @ C.T).reshape(n, k_ctx, L, d_w)
    text = text + sig_txt * rng.standard_normal((n, k_ctx, L, d_w))

    feats = FeatureSet(global_=global_.astype("<f4"),
                       conv=conv.astype("<f4"),
                       text=text.astype("<f4"))

    os.makedirs(out_dir, exist_ok=True)
    irm_graph.write_graph(os.path.join(out_dir, "graph.txt"), net)
    write_features(os.path.join(out_dir, "global.irmf"), "global", feats.global_)
    write_features(os.path.join(out_dir, "conv.irmf"), "conv", feats.conv)
    write_features(os.path.join(out_dir, "text.irmf"), "text", feats.text)
    latents_path = os.path.join(out_dir, "latents.npz")
    np.savez(latents_path, r_star=r_star, t_star=t_star)
    manifest_path = os.path.join(out_dir, "manifest.json")
    write_manifest(manifest_path, "graph.txt", "global.irmf", "conv.irmf",
                   "text.irmf", feats.dims(),
                   extra={"synth": asdict(cfg), "latents": "latents.npz"})
    return manifest_path, net, feats, {"r_star": r_star, "t_star": t_star}


def rank_size_exponent(degrees, tail_frac=0.5):
    """Estimate a power-law tail exponent from a degree sample.

    Fits log(degree) vs log(rank) on the top `tail_frac` of nonzero ranks;
    slope -b gives exponent 1 + 1/b.
    """
    deg = np.sort(np.asarray(degrees, dtype=np.float64))[::-1]
    deg = deg[deg > 0]
    k = max(10, int(len(deg) * tail_frac))
    deg = deg[:k]
    ranks = np.arange(1, len(deg) + 1, dtype=np.float64)
    slope = np.polyfit(np.log(ranks), np.log(deg), 1)[0]
    if slope >= 0:
        return np.inf
    return 1.0 - 1.0 / slope
