"""Named parameter store shared by the model, the optimizers and checkpointing."""

from __future__ import annotations

import numpy as np

from .tensor import Tensor, parameter


class ParamStore:
    """Ordered map name -> trainable Tensor; gradients live on the tensors."""

    def __init__(self):
        self._params: dict[str, Tensor] = {}

    def create(self, name, array):
        if name in self._params:
            raise KeyError(f"duplicate parameter name: {name}")
        t = parameter(np.array(array, dtype=np.float64))
        self._params[name] = t
        return t

    def __getitem__(self, name) -> Tensor:
        return self._params[name]

    def __contains__(self, name):
        return name in self._params

    def __iter__(self):
        return iter(self._params)

    def __len__(self):
        return len(self._params)

    def items(self):
        return self._params.items()

    def names(self):
        return list(self._params)

    def zero_grad(self):
        for t in self._params.values():
            t.grad = None

    def grads(self):
        """Gradient map with zeros for parameters untouched by the last backward."""
        return {k: (t.grad if t.grad is not None else np.zeros_like(t.data))
                for k, t in self._params.items()}

    def state_arrays(self):
        return {k: t.data.copy() for k, t in self._params.items()}

    def load_arrays(self, arrays):
        for k, a in arrays.items():
            t = self._params[k]
            if t.data.shape != np.asarray(a).shape:
                raise ValueError(f"shape mismatch loading {k}")
            t.data = np.array(a, dtype=np.float64)
