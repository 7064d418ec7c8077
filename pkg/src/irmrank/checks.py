"""Whole-model gradient checks on a desk-scale instance, one per variant."""

from __future__ import annotations

import numpy as np

from . import graph as irm_graph
from . import tensor as T
from .features import SynthConfig, synth_generate
from .gradcheck import finite_diff_check
from .pipeline import Model, TrainConfig


def _tiny_dataset(tmpdir, seed):
    cfg = SynthConfig(n_users=6, n_tweets=12, latent_dim=4, noise=0.2,
                      positives_per_user=3, followees_per_user=2, seed=seed,
                      d_f=5, conv_shape=(4, 4, 4), text_shape=(2, 3, 4))
    _, net, feats, _ = synth_generate(cfg, tmpdir)
    return net, feats


def variant_gradcheck(variant, workdir, seed=0, n_tuples=3, eps=1e-5,
                      samples_per_param=4, d=8, d_t=6, corrupt_param=None):
    """Finite-difference check of the full ranking loss for one variant.

    Returns {param name: max relative error}. `corrupt_param` is a test hook
    that perturbs one analytic gradient to prove the check can fail.
    """
    net, feats = _tiny_dataset(workdir, seed)
    tc = TrainConfig(variant=variant, d=d, d_t=d_t, attn_dim=4,
                     social_attn_dim=4, glimpse_hidden=4, seed=seed)
    model = Model(tc, net, feats)
    rng = np.random.default_rng(seed + 1)
    tuples = [irm_graph.sample_tuple(net, rng) for _ in range(n_tuples)]

    def loss_builder():
        losses = [model.tuple_loss(t) for t in tuples]
        acc = losses[0]
        for l in losses[1:]:
            acc = T.add(acc, l)
        return T.scale(acc, 1.0 / len(losses))

    grad_tweak = None
    if corrupt_param is not None:
        def grad_tweak(analytic):
            analytic[corrupt_param] = analytic[corrupt_param] + 1.0

    return finite_diff_check(loss_builder, model.store, eps=eps,
                             samples_per_param=samples_per_param,
                             rng=np.random.default_rng(seed + 2),
                             grad_tweak=grad_tweak)
