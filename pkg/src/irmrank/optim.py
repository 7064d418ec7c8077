"""First-order optimizers operating in place on a ParamStore."""

from __future__ import annotations

import numpy as np

from .params import ParamStore


class Adam:
    """Bias-corrected adaptive moment estimation (Kingma & Ba)."""

    def __init__(self, store: ParamStore, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.store = store
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(t.data) for k, t in store.items()}
        self.v = {k: np.zeros_like(t.data) for k, t in store.items()}

    def step(self):
        self.t += 1
        grads = self.store.grads()
        b1t = 1.0 - self.beta1 ** self.t
        b2t = 1.0 - self.beta2 ** self.t
        for k, t in self.store.items():
            g = grads[k]
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * g * g
            mhat = self.m[k] / b1t
            vhat = self.v[k] / b2t
            t.data = t.data - self.lr * mhat / (np.sqrt(vhat) + self.eps)

    def state(self):
        return {"t": self.t,
                "m": {k: v.copy() for k, v in self.m.items()},
                "v": {k: v.copy() for k, v in self.v.items()}}

    def load_state(self, state):
        self.t = int(state["t"])
        for k in self.m:
            self.m[k] = np.array(state["m"][k], dtype=np.float64)
            self.v[k] = np.array(state["v"][k], dtype=np.float64)


class SGD:
    """Plain gradient descent, mostly for tests and sanity baselines."""

    def __init__(self, store: ParamStore, lr=1e-2):
        self.store = store
        self.lr = lr
        self.t = 0

    def step(self):
        self.t += 1
        grads = self.store.grads()
        for k, t in self.store.items():
            t.data = t.data - self.lr * grads[k]

    def state(self):
        return {"t": self.t}

    def load_state(self, state):
        self.t = int(state["t"])


def make_optimizer(name, store, lr):
    if name == "adam":
        return Adam(store, lr=lr)
    if name == "sgd":
        return SGD(store, lr=lr)
    raise ValueError(f"unknown optimizer: {name}")
