"""Adaptive-moment optimizer for ParamSets."""

import numpy as np

from ..kernels import backend as K
from .autodiff import ShapeError


class Adam:
    """Standard bias-corrected Adam; updates parameters in place."""

    def __init__(self, params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self.m = {k: np.zeros_like(p.value) for k, p in params.items()}
        self.v = {k: np.zeros_like(p.value) for k, p in params.items()}

    def step(self, grads):
        """Apply one update from a name -> gradient map."""
        self.step_count += 1
        for name, p in self.params.items():
            g = grads.get(name)
            if g is None:
                g = np.zeros_like(p.value)
            if g.shape != p.value.shape:
                raise ShapeError(f"gradient for '{name}' has shape {g.shape}, expected {p.value.shape}")
            K.adam_update(
                p.value, g, self.m[name], self.v[name],
                self.step_count, self.lr, self.beta1, self.beta2, self.eps,
            )

    def step_from_tape(self):
        """Use gradients accumulated on the ParamSet by a backward pass."""
        grads = {k: (p.grad if p.grad is not None else np.zeros_like(p.value))
                 for k, p in self.params.items()}
        self.step(grads)
        self.params.zero_grads()

    def state_arrays(self):
        """Flat name -> array view of optimizer state for checkpointing."""
        out = {}
        for k in self.params.names():
            out[f"adam.m.{k}"] = self.m[k]
            out[f"adam.v.{k}"] = self.v[k]
        return out

    def load_state_arrays(self, arrays, step_count):
        for k in self.params.names():
            self.m[k][...] = arrays[f"adam.m.{k}"]
            self.v[k][...] = arrays[f"adam.v.{k}"]
        self.step_count = int(step_count)
