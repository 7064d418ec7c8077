"""Central finite-difference gradient checking against the autodiff engine."""

from __future__ import annotations

import numpy as np

from .tensor import backward
from .params import ParamStore


class EvaluationError(RuntimeError):
    """Loss evaluated to a non-finite value during checking."""


def finite_diff_check(loss_builder, store: ParamStore, eps=1e-5,
                      samples_per_param=6, rng=None, grad_tweak=None):
    """Compare analytic gradients with central differences on sampled coordinates.

    `loss_builder()` must rebuild the loss graph from the current contents of
    `store` and return a scalar Tensor. Returns {name: max relative error};
    relative error uses a floored denominator so near-zero pairs compare on an
    absolute scale.
    """
    if not (0 < eps <= 1e-2):
        raise ValueError("eps must be in (0, 1e-2]")
    if rng is None:
        rng = np.random.default_rng(0)

    store.zero_grad()
    loss = loss_builder()
    if not np.isfinite(loss.data):
        raise EvaluationError("loss is non-finite")
    backward(loss)
    analytic = store.grads()
    if grad_tweak is not None:
        grad_tweak(analytic)  # test hook: fault-inject a corrupted gradient

    def eval_loss():
        v = float(loss_builder().data)
        if not np.isfinite(v):
            raise EvaluationError("loss is non-finite")
        return v

    report = {}
    for name, t in store.items():
        flat = t.data.reshape(-1)
        n = flat.shape[0]
        idx = np.arange(n) if n <= samples_per_param else rng.choice(n, samples_per_param, replace=False)
        worst = 0.0
        ga = analytic[name].reshape(-1)
        for i in idx:
            orig = flat[i]
            flat[i] = orig + eps
            fp = eval_loss()
            flat[i] = orig - eps
            fm = eval_loss()
            flat[i] = orig
            fd = (fp - fm) / (2.0 * eps)
            denom = max(abs(ga[i]), abs(fd), 1e-6)
            worst = max(worst, abs(ga[i] - fd) / denom)
        report[name] = worst
    return report
