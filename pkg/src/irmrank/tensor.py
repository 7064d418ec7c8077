"""Minimal reverse-mode autodiff over dense numpy float64 arrays.

Every differentiable operation used by the model is registered here with an
analytic vector-Jacobian product; `backward` composes them over the recorded
evaluation graph. Arrays stay small (desk-scale vectors/matrices), so the
implementation favours clarity over batching tricks.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Tensor", "tensor", "constant", "parameter", "backward",
    "add", "sub", "mul", "scale", "neg", "matvec", "dot",
    "relu", "tanh_act", "tanh_scaled", "sigmoid", "softmax",
    "stack_scalars", "mean_tensors", "take_row", "pick", "scale_by", "add_scalar",
    "maximum_zero", "matmat", "add_cols", "concat_rows", "concat_vecs",
    "slice_rows", "mean_cols", "OP_REGISTRY",
]


class ShapeError(ValueError):
    """Operand shapes are inconsistent."""


class Tensor:
    """Node in the evaluation graph: a float64 array plus backward closure."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_bw")

    def __init__(self, data, requires_grad=False, parents=(), bw=None):
        self.data = data
        self.grad = None
        self.requires_grad = requires_grad
        self._parents = parents
        self._bw = bw

    @property
    def shape(self):
        return self.data.shape

    def item(self):
        return float(self.data)

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"


def _as_array(x):
    a = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(a)):
        raise ValueError("non-finite values rejected at op boundary")
    return a


def tensor(data, requires_grad=False):
    """Wrap raw data as a leaf tensor, rejecting NaN/Inf entries."""
    return Tensor(_as_array(data), requires_grad=requires_grad)


def constant(data):
    return tensor(data, requires_grad=False)


def parameter(data):
    return tensor(data, requires_grad=True)


def _track(*ts):
    return any(t.requires_grad or t._parents for t in ts)


def _node(data, parents, bw):
    if any(p.requires_grad or p._parents for p in parents):
        return Tensor(data, parents=parents, bw=bw)
    return Tensor(data)


def _accum(t, g):
    if t.grad is None:
        t.grad = np.array(g, dtype=np.float64)
    else:
        t.grad = t.grad + g


def backward(out):
    """Reverse-sweep from scalar `out`, accumulating .grad on every node."""
    if out.data.shape != ():
        raise ShapeError("backward expects a scalar output")
    order = []
    seen = set()
    stack = [(out, False)]
    while stack:
        node, done = stack.pop()
        if done:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if id(p) not in seen and (p.requires_grad or p._parents):
                stack.append((p, False))
    out.grad = np.array(1.0)
    for node in reversed(order):
        if node._bw is not None and node.grad is not None:
            node._bw(node.grad)


# ---------------------------------------------------------------------------
# elementwise / linear ops

def add(a, b):
    if a.data.shape != b.data.shape:
        raise ShapeError(f"add: {a.data.shape} vs {b.data.shape}")
    def bw(g):
        if a.requires_grad or a._parents:
            _accum(a, g)
        if b.requires_grad or b._parents:
            _accum(b, g)
    return _node(a.data + b.data, (a, b), bw)


def sub(a, b):
    return add(a, neg(b))


def neg(a):
    def bw(g):
        _accum(a, -g)
    return _node(-a.data, (a,), bw)


def mul(a, b):
    """Elementwise (or scalar-scalar) product."""
    if a.data.shape != b.data.shape:
        raise ShapeError(f"mul: {a.data.shape} vs {b.data.shape}")
    def bw(g):
        if a.requires_grad or a._parents:
            _accum(a, g * b.data)
        if b.requires_grad or b._parents:
            _accum(b, g * a.data)
    return _node(a.data * b.data, (a, b), bw)


def scale(a, c):
    c = float(c)
    def bw(g):
        _accum(a, g * c)
    return _node(a.data * c, (a,), bw)


def add_scalar(a, c):
    c = float(c)
    def bw(g):
        _accum(a, g)
    return _node(a.data + c, (a,), bw)


def matvec(W, v):
    """W @ v with W (m, n) and v (n,); the workhorse behind every weight matrix."""
    if W.data.ndim != 2 or v.data.ndim != 1 or W.data.shape[1] != v.data.shape[0]:
        raise ShapeError(f"matvec: {W.data.shape} @ {v.data.shape}")
    def bw(g):
        if W.requires_grad or W._parents:
            _accum(W, np.outer(g, v.data))
        if v.requires_grad or v._parents:
            _accum(v, W.data.T @ g)
    return _node(W.data @ v.data, (W, v), bw)


def matmat(A, B):
    """A @ B with A (m, k) and B (k, n); batches several columns at once."""
    if A.data.ndim != 2 or B.data.ndim != 2 or A.data.shape[1] != B.data.shape[0]:
        raise ShapeError(f"matmat: {A.data.shape} @ {B.data.shape}")
    def bw(g):
        if A.requires_grad or A._parents:
            _accum(A, g @ B.data.T)
        if B.requires_grad or B._parents:
            _accum(B, A.data.T @ g)
    return _node(A.data @ B.data, (A, B), bw)


def add_cols(M, b):
    """M + b[:, None]: add a bias vector to every column of a matrix."""
    if M.data.ndim != 2 or b.data.ndim != 1 or M.data.shape[0] != b.data.shape[0]:
        raise ShapeError(f"add_cols: {M.data.shape} + {b.data.shape}")
    def bw(g):
        if M.requires_grad or M._parents:
            _accum(M, g)
        if b.requires_grad or b._parents:
            _accum(b, g.sum(axis=1))
    return _node(M.data + b.data[:, None], (M, b), bw)


def concat_rows(mats):
    """Stack matrices vertically; vjp splits the cotangent back per block."""
    mats = list(mats)
    if not mats:
        raise ValueError("concat_rows: empty input")
    rows = [m.data.shape[0] for m in mats]
    offsets = np.cumsum([0] + rows)
    def bw(g):
        for m, lo, hi in zip(mats, offsets[:-1], offsets[1:]):
            if m.requires_grad or m._parents:
                _accum(m, g[lo:hi])
    return _node(np.concatenate([m.data for m in mats], axis=0), tuple(mats), bw)


def slice_rows(M, lo, hi):
    """Rows [lo, hi) of a matrix; vjp scatters into that row band."""
    if M.data.ndim != 2:
        raise ShapeError("slice_rows: need a matrix")
    lo, hi = int(lo), int(hi)
    if not (0 <= lo < hi <= M.data.shape[0]):
        raise ShapeError(f"slice_rows: [{lo}, {hi}) outside {M.data.shape}")
    def bw(g):
        full = np.zeros_like(M.data)
        full[lo:hi] = g
        _accum(M, full)
    return _node(M.data[lo:hi].copy(), (M,), bw)


def concat_vecs(vs):
    """Concatenate vector tensors end to end; vjp splits the cotangent."""
    vs = list(vs)
    if not vs:
        raise ValueError("concat_vecs: empty input")
    sizes = [v.data.shape[0] for v in vs]
    offsets = np.cumsum([0] + sizes)
    def bw(g):
        for v, lo, hi in zip(vs, offsets[:-1], offsets[1:]):
            if v.requires_grad or v._parents:
                _accum(v, g[lo:hi])
    return _node(np.concatenate([v.data for v in vs]), tuple(vs), bw)


def mean_cols(M):
    """Column mean of a matrix tensor, returned as a vector."""
    if M.data.ndim != 2 or M.data.shape[1] == 0:
        raise ShapeError("mean_cols: need a nonempty matrix")
    n = M.data.shape[1]
    def bw(g):
        _accum(M, np.repeat(g[:, None], n, axis=1) / n)
    return _node(M.data.mean(axis=1), (M,), bw)


def dot(u, v):
    if u.data.shape != v.data.shape or u.data.ndim != 1:
        raise ShapeError(f"dot: {u.data.shape} vs {v.data.shape}")
    def bw(g):
        if u.requires_grad or u._parents:
            _accum(u, g * v.data)
        if v.requires_grad or v._parents:
            _accum(v, g * u.data)
    return _node(np.asarray(u.data @ v.data), (u, v), bw)


# ---------------------------------------------------------------------------
# nonlinearities

def relu(a):
    mask = a.data > 0
    def bw(g):
        _accum(a, g * mask)
    return _node(np.where(mask, a.data, 0.0), (a,), bw)


maximum_zero = relu  # hinge uses the same subgradient convention (0 at the kink)


def tanh_act(a):
    out = np.tanh(a.data)
    def bw(g):
        _accum(a, g * (1.0 - out * out))
    return _node(out, (a,), bw)


def tanh_scaled(a, s):
    """s * tanh(x) elementwise; s must be positive."""
    s = float(s)
    if s <= 0:
        raise ValueError("tanh_scaled: scale must be positive")
    out = s * np.tanh(a.data)
    def bw(g):
        _accum(a, g * (s - out * out / s))
    return _node(out, (a,), bw)


def sigmoid(a):
    # overflow-safe logistic: exp of a nonpositive argument only
    x = a.data
    e = np.exp(-np.abs(x))
    out = np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    def bw(g):
        _accum(a, g * out * (1.0 - out))
    return _node(out, (a,), bw)


def softmax(s):
    """Stable softmax over a vector of scores."""
    if s.data.ndim != 1 or s.data.shape[0] == 0:
        raise ValueError("softmax: need a nonempty score vector")
    e = np.exp(s.data - s.data.max())
    p = e / e.sum()
    def bw(g):
        _accum(s, p * (g - p @ g))
    return _node(p, (s,), bw)


# ---------------------------------------------------------------------------
# structural ops

def stack_scalars(scalars):
    """Assemble scalar tensors into one vector."""
    scalars = list(scalars)
    if not scalars:
        raise ValueError("stack_scalars: empty input")
    def bw(g):
        for i, t in enumerate(scalars):
            if t.requires_grad or t._parents:
                _accum(t, np.asarray(g[i]))
    return _node(np.array([t.data for t in scalars]), tuple(scalars), bw)


def mean_tensors(ts):
    """Mean of same-shape tensors (sentence/context pooling)."""
    ts = list(ts)
    if not ts:
        raise ValueError("mean_tensors: empty input")
    n = len(ts)
    def bw(g):
        for t in ts:
            if t.requires_grad or t._parents:
                _accum(t, g / n)
    return _node(sum(t.data for t in ts) / n, tuple(ts), bw)


def pick(v, i):
    """Scalar element i of a vector tensor; vjp scatters into that slot."""
    if v.data.ndim != 1:
        raise ShapeError("pick: need a vector")
    i = int(i)
    def bw(g):
        full = np.zeros_like(v.data)
        full[i] = g
        _accum(v, full)
    return _node(np.asarray(v.data[i]), (v,), bw)


def scale_by(v, s):
    """Vector times a scalar tensor (attention-weighted aggregation)."""
    if s.data.shape != ():
        raise ShapeError("scale_by: scale must be a scalar tensor")
    def bw(g):
        if v.requires_grad or v._parents:
            _accum(v, g * float(s.data))
        if s.requires_grad or s._parents:
            _accum(s, np.asarray(np.sum(g * v.data)))
    return _node(v.data * float(s.data), (v, s), bw)


def take_row(M, i):
    """Row i of a 2-d tensor; vjp scatters into that row only."""
    if M.data.ndim != 2:
        raise ShapeError("take_row: need a matrix")
    i = int(i)
    def bw(g):
        full = np.zeros_like(M.data)
        full[i] = g
        _accum(M, full)
    return _node(M.data[i].copy(), (M,), bw)


# ---------------------------------------------------------------------------
# registry for the generic vjp-vs-finite-difference property test

def _rand(shape, rng):
    return rng.standard_normal(shape)

OP_REGISTRY = {
    # name -> (builder(rng) -> (fn(list of Tensors) -> scalar-able Tensor, leaf arrays))
    "add": lambda rng: (lambda xs: add(xs[0], xs[1]), [_rand(5, rng), _rand(5, rng)]),
    "sub": lambda rng: (lambda xs: sub(xs[0], xs[1]), [_rand(4, rng), _rand(4, rng)]),
    "mul": lambda rng: (lambda xs: mul(xs[0], xs[1]), [_rand(6, rng), _rand(6, rng)]),
    "neg": lambda rng: (lambda xs: neg(xs[0]), [_rand(5, rng)]),
    "scale": lambda rng: (lambda xs: scale(xs[0], 1.7), [_rand(5, rng)]),
    "matvec": lambda rng: (lambda xs: matvec(xs[0], xs[1]), [_rand((3, 4), rng), _rand(4, rng)]),
    "dot": lambda rng: (lambda xs: dot(xs[0], xs[1]), [_rand(5, rng), _rand(5, rng)]),
    "relu": lambda rng: (lambda xs: relu(xs[0]), [_rand(7, rng) + 0.05]),
    "tanh": lambda rng: (lambda xs: tanh_act(xs[0]), [_rand(5, rng)]),
    "tanh_scaled": lambda rng: (lambda xs: tanh_scaled(xs[0], 2.5), [_rand(5, rng)]),
    "sigmoid": lambda rng: (lambda xs: sigmoid(xs[0]), [_rand(5, rng)]),
    "softmax": lambda rng: (lambda xs: softmax(xs[0]), [_rand(6, rng)]),
    "stack_scalars": lambda rng: (
        lambda xs: stack_scalars([dot(xs[0], xs[1]), dot(xs[0], xs[0])]),
        [_rand(4, rng), _rand(4, rng)]),
    "mean_tensors": lambda rng: (lambda xs: mean_tensors(xs), [_rand(3, rng) for _ in range(4)]),
    "take_row": lambda rng: (lambda xs: take_row(xs[0], 1), [_rand((3, 4), rng)]),
    "pick": lambda rng: (lambda xs: pick(xs[0], 2), [_rand(5, rng)]),
    "scale_by": lambda rng: (lambda xs: scale_by(xs[0], dot(xs[1], xs[1])),
                             [_rand(4, rng), _rand(3, rng)]),
    "matmat": lambda rng: (lambda xs: matmat(xs[0], xs[1]),
                           [_rand((3, 4), rng), _rand((4, 2), rng)]),
    "add_cols": lambda rng: (lambda xs: add_cols(xs[0], xs[1]),
                             [_rand((3, 4), rng), _rand(3, rng)]),
    "concat_rows": lambda rng: (lambda xs: matmat(concat_rows(xs[:2]), xs[2]),
                                [_rand((2, 3), rng), _rand((4, 3), rng),
                                 _rand((3, 2), rng)]),
    "concat_vecs": lambda rng: (lambda xs: concat_vecs(xs),
                                [_rand(3, rng), _rand(2, rng), _rand(4, rng)]),
    "slice_rows": lambda rng: (lambda xs: slice_rows(xs[0], 1, 3),
                               [_rand((4, 3), rng)]),
    "mean_cols": lambda rng: (lambda xs: mean_cols(xs[0]), [_rand((3, 5), rng)]),
}
