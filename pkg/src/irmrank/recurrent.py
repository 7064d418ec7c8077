"""Recurrent cells (LSTM and plain tanh RNN) built from registered tensor ops."""

from __future__ import annotations

import numpy as np

from . import tensor as T
from .params import ParamStore

LSTM_GATES = ("i", "f", "o", "g")


def init_lstm_params(store: ParamStore, prefix, in_dim, hidden_dim, rng, std=0.1):
    """Create the 4x(W_x, W_h, b) LSTM parameter set under `prefix`."""
    for gate in LSTM_GATES:
        store.create(f"{prefix}/Wx{gate}", rng.normal(0.0, std, (hidden_dim, in_dim)))
        store.create(f"{prefix}/Wh{gate}", rng.normal(0.0, std, (hidden_dim, hidden_dim)))
        store.create(f"{prefix}/b{gate}", np.zeros(hidden_dim))


def lstm_cell(x, h_prev, c_prev, store: ParamStore, prefix):
    """One LSTM step: logistic input/forget/output gates, tanh candidate."""
    def pre(gate):
        return T.add(T.add(T.matvec(store[f"{prefix}/Wx{gate}"], x),
                           T.matvec(store[f"{prefix}/Wh{gate}"], h_prev)),
                     store[f"{prefix}/b{gate}"])
    i = T.sigmoid(pre("i"))
    f = T.sigmoid(pre("f"))
    o = T.sigmoid(pre("o"))
    g = T.tanh_act(pre("g"))
    c = T.add(T.mul(f, c_prev), T.mul(i, g))
    h = T.mul(o, T.tanh_act(c))
    return h, c


def init_tanh_rnn_params(store: ParamStore, prefix, in_dim, hidden_dim, rng, std=0.1):
    store.create(f"{prefix}/Wx", rng.normal(0.0, std, (hidden_dim, in_dim)))
    store.create(f"{prefix}/Wh", rng.normal(0.0, std, (hidden_dim, hidden_dim)))
    store.create(f"{prefix}/b", np.zeros(hidden_dim))


def tanh_rnn_cell(x, h_prev, store: ParamStore, prefix):
    """Plain tanh recurrence; hidden state doubles as the cell output."""
    h = T.tanh_act(T.add(T.add(T.matvec(store[f"{prefix}/Wx"], x),
                               T.matvec(store[f"{prefix}/Wh"], h_prev)),
                         store[f"{prefix}/b"]))
    return h


def run_lstm(words, store: ParamStore, prefix, hidden_dim):
    """Run the LSTM left-to-right from zero state; return the final hidden state."""
    if len(words) == 0:
        raise ValueError("empty input sequence")
    h = T.constant(np.zeros(hidden_dim))
    c = T.constant(np.zeros(hidden_dim))
    for w in words:
        x = w if isinstance(w, T.Tensor) else T.constant(w)
        h, c = lstm_cell(x, h, c, store, prefix)
    return h


def stacked_lstm_weights(store: ParamStore, prefix):
    """Concatenate the per-gate weights into (Wx 4H x in, Wh 4H x H, b 4H).

    The stacked tensors share storage with the per-gate parameters through the
    concat vjp, so gradients land on the original entries. Build once per
    evaluation graph and reuse across time steps and sequences.
    """
    Wx = T.concat_rows([store[f"{prefix}/Wx{g}"] for g in LSTM_GATES])
    Wh = T.concat_rows([store[f"{prefix}/Wh{g}"] for g in LSTM_GATES])
    b = T.concat_vecs([store[f"{prefix}/b{g}"] for g in LSTM_GATES])
    return Wx, Wh, b


def run_lstm_batch(seqs, store: ParamStore, prefix, hidden_dim):
    """Run B equal-length sequences through the LSTM at once.

    `seqs` is an array of shape (B, L, in_dim); returns the final hidden
    states as a (hidden_dim, B) tensor. Matches B independent `run_lstm`
    calls up to floating-point association.
    """
    seqs = np.asarray(seqs, dtype=np.float64)
    if seqs.ndim != 3 or seqs.shape[1] == 0:
        raise ValueError("run_lstm_batch: need nonempty (B, L, in_dim) input")
    B, L, _ = seqs.shape
    Wx, Wh, bias = stacked_lstm_weights(store, prefix)
    H = hidden_dim
    h = T.constant(np.zeros((H, B)))
    c = T.constant(np.zeros((H, B)))
    for t in range(L):
        x = T.constant(seqs[:, t, :].T)               # (in_dim, B)
        pre = T.add_cols(T.add(T.matmat(Wx, x), T.matmat(Wh, h)), bias)
        i = T.sigmoid(T.slice_rows(pre, 0, H))
        f = T.sigmoid(T.slice_rows(pre, H, 2 * H))
        o = T.sigmoid(T.slice_rows(pre, 2 * H, 3 * H))
        g = T.tanh_act(T.slice_rows(pre, 3 * H, 4 * H))
        c = T.add(T.mul(f, c), T.mul(i, g))
        h = T.mul(o, T.tanh_act(c))
    return h
