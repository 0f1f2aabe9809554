"""Dense networks over the autodiff substrate.

``ParamSet`` is an ordered name -> tensor map (names like "enc.0.w").
``Mlp`` owns a stack of fused dense layers with a per-layer activation plan
and offers two forward paths: ``__call__`` builds the gradient tape,
``infer`` is a tape-free numpy pass used in hot rollouts.
"""

import numpy as np

from ..kernels import ACTIVATION_IDS, IDENTITY
from ..kernels import backend as K
from . import autodiff as ad


class ParamSet:
    """Ordered, uniquely named map of trainable tensors."""

    def __init__(self):
        self._params = {}

    def add(self, name, value):
        if name in self._params:
            raise ValueError(f"duplicate parameter name '{name}'")
        self._params[name] = ad.leaf(np.asarray(value, dtype=np.float64))
        return self._params[name]

    def __getitem__(self, name):
        return self._params[name]

    def __contains__(self, name):
        return name in self._params

    def __len__(self):
        return len(self._params)

    def names(self):
        return list(self._params)

    def items(self):
        return self._params.items()

    def values(self):
        return self._params.values()

    def arrays(self):
        """Name -> ndarray view of current values."""
        return {k: v.value for k, v in self._params.items()}

    def zero_grads(self):
        for p in self._params.values():
            p.grad = None

    def copy_values_from(self, other):
        for name, p in self._params.items():
            src = other[name].value
            if src.shape != p.value.shape:
                raise ad.ShapeError(f"parameter '{name}': shape mismatch in copy")
            p.value[...] = src

    def clone(self):
        out = ParamSet()
        for name, p in self._params.items():
            out.add(name, p.value.copy())
        return out


def glorot_init(rng, fan_in, fan_out):
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=(fan_in, fan_out))


class Mlp:
    """Fully connected stack with a named activation plan.

    sizes: [d_in, h1, ..., d_out]; activations: one name per layer
    ("identity" | "relu" | "tanh" | "softplus").  ``zero_last`` initializes
    the final layer's weights and bias to zero.
    """

    def __init__(self, sizes, activations, rng, params=None, prefix="mlp", zero_last=False):
        if len(activations) != len(sizes) - 1:
            raise ValueError("need one activation per layer")
        self.sizes = list(sizes)
        self.act_ids = [ACTIVATION_IDS[a] for a in activations]
        self.prefix = prefix
        self.params = params if params is not None else ParamSet()
        self.layer_names = []
        for i, (fi, fo) in enumerate(zip(sizes[:-1], sizes[1:])):
            lname = f"{prefix}.{i}"
            self.layer_names.append(lname)
            last = i == len(sizes) - 2
            if zero_last and last:
                w = np.zeros((fi, fo))
            else:
                w = glorot_init(rng, fi, fo)
            self.params.add(f"{lname}.w", w)
            self.params.add(f"{lname}.b", np.zeros(fo))

    @property
    def in_dim(self):
        return self.sizes[0]

    @property
    def out_dim(self):
        return self.sizes[-1]

    def __call__(self, x):
        """Tape-building forward pass; ``x`` is a Var or ndarray."""
        h = ad.as_var(x)
        for lname, act in zip(self.layer_names, self.act_ids):
            h = ad.dense(h, self.params[f"{lname}.w"], self.params[f"{lname}.b"], act, name=lname)
        return h

    def infer(self, x):
        """Tape-free forward pass on raw arrays (same kernels, same values)."""
        h = np.asarray(x, dtype=np.float64)
        for lname, act in zip(self.layer_names, self.act_ids):
            w = self.params[f"{lname}.w"].value
            b = self.params[f"{lname}.b"].value
            if h.shape[-1] != w.shape[0]:
                raise ad.ShapeError(
                    f"layer '{lname}': input width {h.shape[-1]} does not match fan-in {w.shape[0]}"
                )
            pre = h @ w + b
            h = K.act_forward(pre, act) if act != IDENTITY else pre
        return h


def gradients(params):
    """Collect gradients as name -> ndarray, zeros where untouched."""
    out = {}
    for name, p in params.items():
        out[name] = np.zeros_like(p.value) if p.grad is None else p.grad
    return out
