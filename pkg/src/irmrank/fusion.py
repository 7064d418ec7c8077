"""Joint image-tweet representations: linear fusion and text-guided glimpses.

Two fusion paths produce the joint vector z_i:
  * linear fusion: z = relu(Wi.f + Wd.ybar), with ybar the mean sentence
    embedding from the LSTM text encoder;
  * attentive fusion: a recurrent glimpse loop reads 3x3 windows of the conv
    feature map under text-attention guidance and adds an attended term
    Wa.gbar, so linear fusion is the exact Wa=0 special case.

Variant naming follows the ablation matrix: "amnl" (linear), "amnl_i" (image
only), "amnl_d" (text only), "amnl+" (attentive), "amnl+i" (attentive with
mean-pooled conv instead of attention). The *_hfunc variants share these
forwards and differ only in the ranking stage.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as T
from . import recurrent
from .params import ParamStore

VARIANTS = ("amnl_i", "amnl_d", "amnl", "amnl_hfunc", "amnl+", "amnl+i", "amnl+hfunc")

# which fusion path each variant uses
ATTENTIVE_VARIANTS = ("amnl+", "amnl+i", "amnl+hfunc")
POOLED_CONV_VARIANTS = ("amnl+i",)
HFUNC_VARIANTS = ("amnl_hfunc", "amnl+hfunc")


class ConfigError(ValueError):
    pass


@dataclass
class FusionConfig:
    d: int = 16            # joint representation dim (== user preference dim)
    d_f: int = 32          # global image feature dim
    d_t: int = 16          # LSTM hidden dim (sentence embedding)
    d_w: int = 16          # word vector dim
    attn_dim: int = 8      # text-attention hidden dim
    conv_shape: tuple = (4, 4, 8)
    k_ctx: int = 2         # contexts per tweet == glimpse steps
    glimpse_hidden: int = 8
    glimpse_cell: str = "lstm"   # "lstm" | "tanh"
    loc_scale: float = 1.0

    @property
    def conv_channels(self):
        return self.conv_shape[2]

    def validate(self):
        if self.conv_shape[0] < 3 or self.conv_shape[1] < 3:
            raise ConfigError("conv grid must be at least 3x3")
        if self.glimpse_cell not in ("lstm", "tanh"):
            raise ConfigError(f"unknown glimpse cell: {self.glimpse_cell}")
        if self.k_ctx < 1:
            raise ConfigError("k_ctx must be >= 1")


def init_fusion_params(store: ParamStore, cfg: FusionConfig, rng, std=0.1):
    """Create all fusion-side parameters in the store."""
    cfg.validate()
    S = cfg.conv_channels
    store.create("fusion/Wi", rng.normal(0.0, std, (cfg.d, cfg.d_f)))
    store.create("fusion/Wd", rng.normal(0.0, std, (cfg.d, cfg.d_t)))
    store.create("fusion/Wa", rng.normal(0.0, std, (cfg.d, S)))
    store.create("text_att/Wl", rng.normal(0.0, std, (cfg.attn_dim, cfg.d_t)))
    store.create("text_att/Wu", rng.normal(0.0, std, (cfg.attn_dim, S)))
    store.create("text_att/p", rng.normal(0.0, std, cfg.attn_dim))
    store.create("text_att/b", np.zeros(cfg.attn_dim))
    recurrent.init_lstm_params(store, "encoder", cfg.d_w, cfg.d_t, rng, std)
    if cfg.glimpse_cell == "lstm":
        recurrent.init_lstm_params(store, "glimpse", S, cfg.glimpse_hidden, rng, std)
    else:
        recurrent.init_tanh_rnn_params(store, "glimpse", S, cfg.glimpse_hidden, rng, std)
    store.create("loc/W0", rng.normal(0.0, std, (2, cfg.d_f)))
    store.create("loc/Wc", rng.normal(0.0, std, (2, cfg.glimpse_hidden)))


def encode_sentence(words, store, cfg: FusionConfig):
    """LSTM over one sentence's word vectors; final hidden state is y_ij."""
    words = np.asarray(words, dtype=np.float64)
    if words.ndim != 2 or words.shape[0] == 0:
        raise ValueError("encode_sentence: need a nonempty (L, d_w) sequence")
    if words.shape[1] != cfg.d_w:
        raise ValueError(f"word dim {words.shape[1]} != configured {cfg.d_w}")
    return recurrent.run_lstm(words, store, "encoder", cfg.d_t)


def _mean_context(contexts, store, cfg):
    """Encode every context sentence; returns (per-sentence ys, mean ybar).

    Equal-length sentences (the common case) go through the batched LSTM,
    which is one traced graph per time step instead of one per sentence.
    """
    lengths = {np.asarray(c).shape[0] for c in contexts}
    if len(contexts) > 1 and len(lengths) == 1:
        seqs = np.asarray(contexts, dtype=np.float64)
        if seqs.shape[1] == 0 or seqs.shape[2] != cfg.d_w:
            raise ValueError("contexts must be nonempty (L, d_w) sequences")
        H = recurrent.run_lstm_batch(seqs, store, "encoder", cfg.d_t)
        eye = np.eye(len(contexts))
        ys = [T.matvec(H, T.constant(eye[j])) for j in range(len(contexts))]
        return ys, T.mean_cols(H)
    ys = [encode_sentence(c, store, cfg) for c in contexts]
    return ys, T.mean_tensors(ys)


def fuse_linear(f_i, contexts, store, cfg: FusionConfig, variant="amnl"):
    """z = relu(Wi.f + Wd.ybar); image-only and text-only ablations drop a term."""
    f = f_i if isinstance(f_i, T.Tensor) else T.constant(f_i)
    if variant == "amnl_i":
        pre = T.matvec(store["fusion/Wi"], f)
    elif variant == "amnl_d":
        _, ybar = _mean_context(contexts, store, cfg)
        pre = T.matvec(store["fusion/Wd"], ybar)
    else:
        _, ybar = _mean_context(contexts, store, cfg)
        pre = T.add(T.matvec(store["fusion/Wi"], f), T.matvec(store["fusion/Wd"], ybar))
    return T.relu(pre)


# ---------------------------------------------------------------------------
# glimpse attention machinery

def clamp_center(loc, conv_shape):
    """Round and clamp a continuous (row, col) into the valid 3x3-center box."""
    Hc, Wc = conv_shape[0], conv_shape[1]
    r = int(np.clip(round(float(loc[0])), 1, Hc - 2))
    c = int(np.clip(round(float(loc[1])), 1, Wc - 2))
    return r, c


def extract_patch(x_i, loc, conv_shape=None):
    """3x3 window of the conv map centered at the clamped location.

    Returns (patches (9, S) array in row-major window order, center (r, c)).
    """
    x = np.asarray(x_i, dtype=np.float64)
    if x.ndim != 3:
        raise ValueError("extract_patch: conv map must be rank-3 (H, W, S)")
    if x.shape[0] < 3 or x.shape[1] < 3:
        raise ConfigError("conv grid must be at least 3x3")
    r, c = clamp_center(loc, x.shape)
    window = x[r - 1:r + 2, c - 1:c + 2, :]
    return window.reshape(9, x.shape[2]), (r, c)


def text_attention(y_ij, patches, store):
    """Attention over 9 patch vectors guided by one sentence embedding.

    s_k = p . tanh(Wl.y + Wu.theta_k + b); alpha = softmax(s);
    g = sum_k alpha_k theta_k. Returns (alpha, g) tensors.
    """
    Wl, Wu = store["text_att/Wl"], store["text_att/Wu"]
    p, b = store["text_att/p"], store["text_att/b"]
    base = T.add(T.matvec(Wl, y_ij), b)
    scores = []
    for k in range(patches.shape[0]):
        theta_k = T.constant(patches[k])
        scores.append(T.dot(p, T.tanh_act(T.add(base, T.matvec(Wu, theta_k)))))
    alpha = T.softmax(T.stack_scalars(scores))
    g = T.matvec(T.constant(patches.T), alpha)   # (S, 9) @ alpha
    return alpha, g


def _box_from_tanh(l_tanh, conv_shape, scale):
    """Affine map from [-scale, scale]^2 onto the valid patch-center box."""
    Hc, Wc = conv_shape[0], conv_shape[1]
    r = 1 + (l_tanh[0] + scale) / (2 * scale) * (Hc - 3)
    c = 1 + (l_tanh[1] + scale) / (2 * scale) * (Wc - 3)
    return r, c


@dataclass
class GlimpseState:
    loc: tuple              # continuous (row, col) in patch-center coordinates
    h: object               # recurrence hidden state (Tensor)
    c: object               # LSTM cell state (Tensor) or None for tanh cell
    out: object             # recurrence output c_ij (Tensor)


def init_glimpse_state(cfg: FusionConfig):
    Hc, Wc = cfg.conv_shape[0], cfg.conv_shape[1]
    center = ((Hc - 1) / 2.0, (Wc - 1) / 2.0)
    h = T.constant(np.zeros(cfg.glimpse_hidden))
    c = T.constant(np.zeros(cfg.glimpse_hidden)) if cfg.glimpse_cell == "lstm" else None
    return GlimpseState(loc=center, h=h, c=c, out=h)


def glimpse_step(state: GlimpseState, g_ij, f_i, store, cfg: FusionConfig):
    """Advance the glimpse recurrence and emit the next location.

    l_next = tanh_scaled(W0.f + Wc.c_out) mapped onto the patch-center box.
    The location is used discretely (round + clamp) by patch extraction, so
    it is detached from the gradient path.
    """
    if cfg.glimpse_cell == "lstm":
        h, c = recurrent.lstm_cell(g_ij, state.h, state.c, store, "glimpse")
        out = h
    else:
        h = recurrent.tanh_rnn_cell(g_ij, state.h, store, "glimpse")
        c, out = None, h
    f = f_i if isinstance(f_i, T.Tensor) else T.constant(f_i)
    l_pre = T.add(T.matvec(store["loc/W0"], f), T.matvec(store["loc/Wc"], out))
    l_tanh = T.tanh_scaled(l_pre, cfg.loc_scale)
    loc = _box_from_tanh(l_tanh.data, cfg.conv_shape, cfg.loc_scale)
    return GlimpseState(loc=loc, h=h, c=c, out=out)


def fuse_attentive(f_i, x_i, contexts, store, cfg: FusionConfig, variant="amnl+"):
    """Text-guided glimpse fusion: z = relu(Wi.f + Wd.ybar + Wa.gbar).

    One glimpse per context; "amnl+i" replaces text attention with the
    spatial mean of the full conv map.
    """
    if len(contexts) != cfg.k_ctx:
        raise ValueError(f"expected {cfg.k_ctx} contexts, got {len(contexts)}")
    f = f_i if isinstance(f_i, T.Tensor) else T.constant(f_i)
    x = np.asarray(x_i, dtype=np.float64)
    ys, ybar = _mean_context(contexts, store, cfg)

    pooled = x.reshape(-1, x.shape[2]).mean(axis=0) if variant in POOLED_CONV_VARIANTS else None
    state = init_glimpse_state(cfg)
    gs = []
    for j in range(cfg.k_ctx):
        if pooled is not None:
            g = T.constant(pooled)
        else:
            patches, _ = extract_patch(x, state.loc)
            _, g = text_attention(ys[j], patches, store)
        gs.append(g)
        state = glimpse_step(state, g, f, store, cfg)
    gbar = T.mean_tensors(gs)

    pre = T.add(T.add(T.matvec(store["fusion/Wi"], f),
                      T.matvec(store["fusion/Wd"], ybar)),
                T.matvec(store["fusion/Wa"], gbar))
    return T.relu(pre)


def tweet_repr(f_i, x_i, contexts, store, cfg: FusionConfig, variant):
    """Dispatch to the variant's fusion path; returns the joint z tensor."""
    if variant not in VARIANTS:
        raise ConfigError(f"unknown variant: {variant}")
    if variant in ATTENTIVE_VARIANTS:
        return fuse_attentive(f_i, x_i, contexts, store, cfg, variant)
    return fuse_linear(f_i, contexts, store, cfg, variant)
