"""Reverse-mode automatic differentiation over float64 numpy arrays.

Tape-based: every operation returns a ``Var`` carrying the forward value and
a closure that scatters the output gradient to its parents.  Only graphs
rooted in parameters propagate gradients; branches built purely from
constants are skipped during backward.
"""

import numpy as np

from ..kernels import backend as K
from ..kernels import IDENTITY


class GradientError(RuntimeError):
    pass


class ShapeError(ValueError):
    pass


class Var:
    """Node in the computation graph."""

    __slots__ = ("value", "grad", "parents", "bwd", "needs_grad")

    def __init__(self, value, parents=(), bwd=None, needs_grad=None):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = None
        self.parents = parents
        self.bwd = bwd
        if needs_grad is None:
            needs_grad = any(p.needs_grad for p in parents)
        self.needs_grad = needs_grad

    @property
    def shape(self):
        return self.value.shape

    def item(self):
        return float(self.value)

    def backward(self):
        """Accumulate gradients of this scalar into every reachable leaf."""
        if self.value.size != 1:
            raise GradientError("backward() requires a scalar loss")
        order = _toposort(self)
        for node in order:
            node.grad = None
        self.grad = np.ones_like(self.value)
        for node in reversed(order):
            if node.bwd is not None and node.grad is not None:
                node.bwd(node.grad)

    # arithmetic sugar; scalars and ndarrays are treated as constants
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return mul(self, -1.0)


def leaf(value):
    """Trainable leaf (parameter)."""
    return Var(value, needs_grad=True)


def constant(value):
    return Var(value, needs_grad=False)


def as_var(x):
    return x if isinstance(x, Var) else constant(x)


def _toposort(root):
    order = []
    seen = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            if id(p) not in seen and p.needs_grad:
                stack.append((p, False))
    return order


def _accum(var, g):
    if not var.needs_grad:
        return
    if var.grad is None:
        var.grad = g.copy()
    else:
        var.grad += g


def _unbroadcast(g, shape):
    """Reduce gradient ``g`` back to ``shape`` after numpy broadcasting."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


def add(a, b):
    a, b = as_var(a), as_var(b)
    out = Var(a.value + b.value, (a, b))

    def bwd(g):
        _accum(a, _unbroadcast(g, a.value.shape))
        _accum(b, _unbroadcast(g, b.value.shape))

    out.bwd = bwd
    return out


def sub(a, b):
    a, b = as_var(a), as_var(b)
    out = Var(a.value - b.value, (a, b))

    def bwd(g):
        _accum(a, _unbroadcast(g, a.value.shape))
        _accum(b, _unbroadcast(-g, b.value.shape))

    out.bwd = bwd
    return out


def mul(a, b):
    a, b = as_var(a), as_var(b)
    out = Var(a.value * b.value, (a, b))

    def bwd(g):
        _accum(a, _unbroadcast(g * b.value, a.value.shape))
        _accum(b, _unbroadcast(g * a.value, b.value.shape))

    out.bwd = bwd
    return out


def square(a):
    a = as_var(a)
    out = Var(a.value * a.value, (a,))

    def bwd(g):
        _accum(a, g * (2.0 * a.value))

    out.bwd = bwd
    return out


def exp(a):
    a = as_var(a)
    ev = np.exp(a.value)
    out = Var(ev, (a,))

    def bwd(g):
        _accum(a, g * ev)

    out.bwd = bwd
    return out


def log(a):
    a = as_var(a)
    out = Var(np.log(a.value), (a,))

    def bwd(g):
        _accum(a, g / a.value)

    out.bwd = bwd
    return out


def tanh(a):
    a = as_var(a)
    t = np.tanh(a.value)
    out = Var(t, (a,))

    def bwd(g):
        _accum(a, g * (1.0 - t * t))

    out.bwd = bwd
    return out


def relu(a):
    a = as_var(a)
    out = Var(np.maximum(a.value, 0.0), (a,))

    def bwd(g):
        _accum(a, np.where(a.value > 0.0, g, 0.0))

    out.bwd = bwd
    return out


def softplus(a):
    a = as_var(a)
    out = Var(K.softplus(a.value), (a,))

    def bwd(g):
        _accum(a, g * K.sigmoid(a.value))

    out.bwd = bwd
    return out


def clamp(a, lo, hi):
    """Clamp with pass-through gradient inside the bounds, zero outside."""
    a = as_var(a)
    out = Var(np.clip(a.value, lo, hi), (a,))

    def bwd(g):
        inside = (a.value >= lo) & (a.value <= hi)
        _accum(a, np.where(inside, g, 0.0))

    out.bwd = bwd
    return out


def vsum(a, axis=None):
    a = as_var(a)
    out = Var(a.value.sum(axis=axis), (a,))

    def bwd(g):
        if axis is None:
            _accum(a, np.broadcast_to(g, a.value.shape).copy())
        else:
            _accum(a, np.broadcast_to(np.expand_dims(g, axis), a.value.shape).copy())

    out.bwd = bwd
    return out


def vmean(a, axis=None):
    a = as_var(a)
    n = a.value.size if axis is None else a.value.shape[axis]
    return mul(vsum(a, axis=axis), 1.0 / n)


def concat(parts, axis=1):
    parts = [as_var(p) for p in parts]
    out = Var(np.concatenate([p.value for p in parts], axis=axis), tuple(parts))
    widths = [p.value.shape[axis] for p in parts]

    def bwd(g):
        start = 0
        for p, w in zip(parts, widths):
            sl = [slice(None)] * g.ndim
            sl[axis] = slice(start, start + w)
            _accum(p, g[tuple(sl)])
            start += w

    out.bwd = bwd
    return out


def slice_cols(a, start, stop):
    a = as_var(a)
    out = Var(a.value[:, start:stop], (a,))

    def bwd(g):
        full = np.zeros_like(a.value)
        full[:, start:stop] = g
        _accum(a, full)

    out.bwd = bwd
    return out


def dense(x, w, b, act=IDENTITY, name="dense"):
    """Fused affine + activation layer: act(x @ w + b).

    ``x`` is (batch, fan_in) or (fan_in,); ``w`` is (fan_in, fan_out).
    Raises ShapeError naming the layer when fan-in does not match.
    """
    x = as_var(x)
    xin = x.value.shape[-1] if x.value.ndim else 1
    if xin != w.value.shape[0]:
        raise ShapeError(
            f"layer '{name}': input width {xin} does not match fan-in {w.value.shape[0]}"
        )
    pre = x.value @ w.value + b.value
    out_val = K.act_forward(pre, act) if act != IDENTITY else pre
    out = Var(out_val, (x, w, b))

    def bwd(g):
        dpre = K.act_backward(g, pre, out_val, act) if act != IDENTITY else g
        if x.value.ndim == 1:
            _accum(b, dpre)
            _accum(w, np.outer(x.value, dpre))
            _accum(x, dpre @ w.value.T)
        else:
            _accum(b, dpre.sum(axis=0))
            _accum(w, x.value.T @ dpre)
            _accum(x, dpre @ w.value.T)

    out.bwd = bwd
    return out


def assert_finite(x, what="value"):
    arr = x.value if isinstance(x, Var) else np.asarray(x)
    if not np.all(np.isfinite(arr)):
        raise FloatingPointError(f"non-finite {what} encountered")
    return x
