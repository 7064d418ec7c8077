"""Personalized and social scoring plus the margin ranking loss.

The multi-faceted score factorizes as F = f_uj(z) * h_Nj(z): a personal
dot-product term r_j.z times a social term built from attention over the
preference vectors of the accounts the user follows. Users with no
neighbors fall back to h = 1 so F stays defined.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .fusion import HFUNC_VARIANTS
from .params import ParamStore


@dataclass(frozen=True)
class Margin:
    c: float = 0.3

    def __post_init__(self):
        if not (0.0 < self.c < 1.0):
            raise ValueError("margin must satisfy 0 < c < 1")


def init_ranking_params(store: ParamStore, n_users, d, attn_dim, rng, std=0.1,
                        pref_mean=0.0):
    # a positive pref_mean starts every f and h on the same sign, which keeps
    # the two facets of the product score from fighting early in training
    store.create("pref/r", rng.normal(pref_mean, std, (n_users, d)))
    store.create("social/Ws", rng.normal(0.0, std, (attn_dim, d)))
    store.create("social/Wn", rng.normal(0.0, std, (attn_dim, d)))
    store.create("social/p", rng.normal(0.0, std, attn_dim))
    store.create("social/b", np.zeros(attn_dim))


def user_pref(store, j):
    return T.take_row(store["pref/r"], j)


def personal_score(r_j, z):
    """f_uj(z) = r_j . z"""
    return T.dot(r_j, z)


def social_attention(r_j, neighbor_ids, store):
    """Attention over neighbor preference vectors.

    score_q = p . tanh(Ws.r_j + Wn.r_q + b); returns (alpha, r_tilde) or
    (None, None) for an empty neighborhood.
    """
    neighbor_ids = sorted(neighbor_ids)
    if not neighbor_ids:
        return None, None
    Ws, Wn = store["social/Ws"], store["social/Wn"]
    p, b = store["social/p"], store["social/b"]
    base = T.add(T.matvec(Ws, r_j), b)
    scores = []
    prefs = []
    for q in neighbor_ids:
        r_q = user_pref(store, q)
        prefs.append(r_q)
        scores.append(T.dot(p, T.tanh_act(T.add(base, T.matvec(Wn, r_q)))))
    alpha = T.softmax(T.stack_scalars(scores))
    acc = None
    for qi, r_q in enumerate(prefs):
        term = T.scale_by(r_q, T.pick(alpha, qi))
        acc = term if acc is None else T.add(acc, term)
    return alpha, acc


def social_influence(r_tilde, z):
    """h_Nj(z) = r_tilde . z, or the constant 1 for an empty neighborhood."""
    if r_tilde is None:
        return T.constant(1.0)
    return T.dot(r_tilde, z)


def multifaceted_score(j, neighbor_ids, z, store, variant="amnl"):
    """F = f * h; *_hfunc variants drop the social term entirely."""
    r_j = user_pref(store, j)
    f = personal_score(r_j, z)
    if variant in HFUNC_VARIANTS:
        return f
    _, r_tilde = social_attention(r_j, neighbor_ids, store)
    return T.mul(f, social_influence(r_tilde, z))


def hinge_loss(F_pos, F_neg, margin: Margin):
    """max(0, c + F_neg - F_pos); subgradient 0 at the kink."""
    return T.maximum_zero(T.add_scalar(T.sub(F_neg, F_pos), margin.c))


def rank_tweets_for_user(j, candidate_ids, score_fn):
    """Sort candidates by score descending, ties broken by ascending id."""
    scored = [(int(t), float(score_fn(j, t))) for t in candidate_ids]
    scored.sort(key=lambda ts: (-ts[1], ts[0]))
    return scored
