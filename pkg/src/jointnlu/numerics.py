"""Dense tensor arithmetic with reverse-mode gradients, stable reductions,
and a finite-difference gradient checker.

Values are float64 numpy arrays throughout the test/oracle path. Tensors are
immutable once returned from an operation; gradient accumulation happens only
through ``backward`` into leaf nodes (Parameters).
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "ShapeError",
    "Tensor",
    "Parameter",
    "matmul",
    "softmax",
    "logsumexp",
    "FiniteDiffReport",
    "finite_diff_check",
]


class ShapeError(ValueError):
    """Raised when operand shapes are inconsistent."""


# ---------------------------------------------------------------------------
# plain-array helpers (also used by Tensor forward passes)
# ---------------------------------------------------------------------------


def matmul(a, b):
    """Matrix product with explicit inner-dimension validation.

    Accepts 2-D x 2-D, 2-D x 1-D and 1-D x 2-D operands.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim not in (1, 2) or b.ndim not in (1, 2):
        raise ShapeError(f"matmul expects 1-D or 2-D operands, got {a.ndim}-D and {b.ndim}-D")
    if a.shape[-1] != b.shape[0]:
        raise ShapeError(f"matmul inner dimensions differ: {a.shape} x {b.shape}")
    return a @ b


def softmax(v, axis=-1):
    """Numerically stable softmax (max-subtraction)."""
    v = np.asarray(v, dtype=np.float64)
    if v.size == 0:
        raise ValueError("softmax of empty input")
    shifted = v - np.max(v, axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=axis, keepdims=True)


def logsumexp(v, axis=None):
    """log(sum(exp(v))) computed stably via max-subtraction."""
    v = np.asarray(v, dtype=np.float64)
    if v.size == 0:
        raise ValueError("logsumexp of empty input")
    m = np.max(v, axis=axis, keepdims=True)
    out = m + np.log(np.sum(np.exp(v - m), axis=axis, keepdims=True))
    if axis is None:
        return out.item()
    return np.squeeze(out, axis=axis)


def _unbroadcast(grad, shape):
    """Sum ``grad`` down to ``shape`` (reverses numpy broadcasting)."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for i, n in enumerate(shape):
        if n == 1 and grad.shape[i] != 1:
            grad = grad.sum(axis=i, keepdims=True)
    return grad.reshape(shape)


# ---------------------------------------------------------------------------
# reverse-mode tensors
# ---------------------------------------------------------------------------


class Tensor:
    """A float64 array plus the backward closure that produced it.

    Graph nodes are created by operations and never mutated; calling
    ``backward`` on a scalar result accumulates gradients into every
    reachable leaf's ``grad``.
    """

    __slots__ = ("value", "grad", "_parents", "_backprop")

    def __init__(self, value, parents=(), backprop=None):
        self.value = np.asarray(value, dtype=np.float64)
        if not np.all(np.isfinite(self.value)):
            raise ValueError("non-finite value in tensor")
        self.grad = None
        self._parents = tuple(parents)
        self._backprop = backprop

    # -- structure ---------------------------------------------------------

    @property
    def shape(self):
        return self.value.shape

    def __repr__(self):
        return f"Tensor(shape={self.value.shape})"

    @staticmethod
    def of(x):
        return x if isinstance(x, Tensor) else Tensor(x)

    def _accum(self, g):
        if self.grad is None:
            self.grad = np.zeros_like(self.value)
        self.grad += g

    def backward(self):
        """Reverse-mode sweep from this (scalar) tensor."""
        if self.value.size != 1:
            raise ShapeError("backward requires a scalar loss")
        order = []
        seen = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        self._accum(np.ones_like(self.value))
        for node in reversed(order):
            if node._backprop is not None:
                node._backprop(node.grad)

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        other = Tensor.of(other)
        out_val = self.value + other.value
        def bp(g):
            self._accum(_unbroadcast(g, self.value.shape))
            other._accum(_unbroadcast(g, other.value.shape))
        return Tensor(out_val, (self, other), bp)

    __radd__ = __add__

    def __neg__(self):
        def bp(g):
            self._accum(-g)
        return Tensor(-self.value, (self,), bp)

    def __sub__(self, other):
        return self + (-Tensor.of(other))

    def __rsub__(self, other):
        return Tensor.of(other) + (-self)

    def __mul__(self, other):
        other = Tensor.of(other)
        out_val = self.value * other.value
        def bp(g):
            self._accum(_unbroadcast(g * other.value, self.value.shape))
            other._accum(_unbroadcast(g * self.value, other.value.shape))
        return Tensor(out_val, (self, other), bp)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = Tensor.of(other)
        out_val = self.value / other.value
        def bp(g):
            self._accum(_unbroadcast(g / other.value, self.value.shape))
            other._accum(_unbroadcast(-g * self.value / other.value**2, other.value.shape))
        return Tensor(out_val, (self, other), bp)

    def __matmul__(self, other):
        other = Tensor.of(other)
        out_val = matmul(self.value, other.value)
        a, b = self.value, other.value
        def bp(g):
            if a.ndim == 2 and b.ndim == 2:
                self._accum(g @ b.T)
                other._accum(a.T @ g)
            elif a.ndim == 2 and b.ndim == 1:
                self._accum(np.outer(g, b))
                other._accum(a.T @ g)
            elif a.ndim == 1 and b.ndim == 2:
                self._accum(g @ b.T)
                other._accum(np.outer(a, g))
            else:  # 1-D x 1-D inner product
                self._accum(g * b)
                other._accum(g * a)
        return Tensor(out_val, (self, other), bp)

    # -- elementwise functions --------------------------------------------

    def exp(self):
        out_val = np.exp(self.value)
        def bp(g):
            self._accum(g * out_val)
        return Tensor(out_val, (self,), bp)

    def log(self):
        def bp(g):
            self._accum(g / self.value)
        return Tensor(np.log(self.value), (self,), bp)

    def sqrt(self):
        out_val = np.sqrt(self.value)
        def bp(g):
            self._accum(g * 0.5 / out_val)
        return Tensor(out_val, (self,), bp)

    def tanh(self):
        out_val = np.tanh(self.value)
        def bp(g):
            self._accum(g * (1.0 - out_val**2))
        return Tensor(out_val, (self,), bp)

    def sigmoid(self):
        out_val = 1.0 / (1.0 + np.exp(-self.value))
        def bp(g):
            self._accum(g * out_val * (1.0 - out_val))
        return Tensor(out_val, (self,), bp)

    def relu(self):
        mask = self.value > 0
        def bp(g):
            self._accum(g * mask)
        return Tensor(self.value * mask, (self,), bp)

    def clip_min(self, lo):
        """Lower clamp; gradient flows only through unclamped entries."""
        mask = self.value >= lo
        def bp(g):
            self._accum(g * mask)
        return Tensor(np.maximum(self.value, lo), (self,), bp)

    # -- reductions and reshaping -----------------------------------------

    def sum(self, axis=None, keepdims=False):
        out_val = self.value.sum(axis=axis, keepdims=keepdims)
        def bp(g):
            gg = np.asarray(g)
            if axis is not None and not keepdims:
                gg = np.expand_dims(gg, axis)
            self._accum(np.broadcast_to(gg, self.value.shape).copy())
        return Tensor(out_val, (self,), bp)

    def mean(self, axis=None, keepdims=False):
        n = self.value.size if axis is None else self.value.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) / float(n)

    def max(self, axis=None):
        """Max reduction; ties route the gradient to the first maximum."""
        out_val = self.value.max(axis=axis)
        idx = self.value.argmax(axis=axis)
        def bp(g):
            full = np.zeros_like(self.value)
            if axis is None:
                full.flat[idx] = g
            else:
                gg = np.asarray(g)
                np.put_along_axis(full, np.expand_dims(idx, axis),
                                  np.expand_dims(gg, axis), axis)
            self._accum(full)
        return Tensor(out_val, (self,), bp)

    def logsumexp(self, axis=None):
        out_val = logsumexp(self.value, axis=axis)
        w = softmax(self.value, axis=(-1 if axis is None else axis)) \
            if axis is not None else softmax(self.value.ravel()).reshape(self.value.shape)
        def bp(g):
            if axis is None:
                self._accum(g * w)
            else:
                self._accum(np.expand_dims(np.asarray(g), axis) * w)
        return Tensor(out_val, (self,), bp)

    def softmax(self, axis=-1):
        out_val = softmax(self.value, axis=axis)
        def bp(g):
            dot = np.sum(g * out_val, axis=axis, keepdims=True)
            self._accum((g - dot) * out_val)
        return Tensor(out_val, (self,), bp)

    def reshape(self, *shape):
        old = self.value.shape
        def bp(g):
            self._accum(g.reshape(old))
        return Tensor(self.value.reshape(*shape), (self,), bp)

    @property
    def T(self):
        def bp(g):
            self._accum(g.T)
        return Tensor(self.value.T, (self,), bp)

    def __getitem__(self, key):
        out_val = self.value[key]
        def bp(g):
            full = np.zeros_like(self.value)
            np.add.at(full, key, g)
            self._accum(full)
        return Tensor(out_val, (self,), bp)

    @staticmethod
    def concat(parts, axis=0):
        parts = [Tensor.of(p) for p in parts]
        out_val = np.concatenate([p.value for p in parts], axis=axis)
        sizes = [p.value.shape[axis] for p in parts]
        offsets = np.cumsum([0] + sizes)
        def bp(g):
            for p, lo, hi in zip(parts, offsets[:-1], offsets[1:]):
                sl = [slice(None)] * g.ndim
                sl[axis] = slice(lo, hi)
                p._accum(g[tuple(sl)])
        return Tensor(out_val, tuple(parts), bp)

    @staticmethod
    def stack(parts):
        """Stack 1-D tensors into a matrix, one per row."""
        parts = [Tensor.of(p) for p in parts]
        out_val = np.stack([p.value for p in parts])
        def bp(g):
            for i, p in enumerate(parts):
                p._accum(g[i])
        return Tensor(out_val, tuple(parts), bp)

    def item(self):
        return float(self.value)


class Parameter(Tensor):
    """A named trainable leaf. ``grad`` persists across backward calls
    until ``zero_grad``; names must be unique within a model."""

    __slots__ = ("name",)

    def __init__(self, name, value):
        super().__init__(np.array(value, dtype=np.float64, copy=True))
        self.name = name

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        return f"Parameter({self.name!r}, shape={self.value.shape})"


# ---------------------------------------------------------------------------
# gradient verification
# ---------------------------------------------------------------------------


class FiniteDiffReport:
    """Per-parameter maximum relative errors of analytic vs central-difference
    gradients."""

    def __init__(self, errors, tolerance):
        self.errors = errors  # name -> max relative error
        self.tolerance = tolerance

    @property
    def max_error(self):
        return max(self.errors.values()) if self.errors else 0.0

    @property
    def passed(self):
        return self.max_error < self.tolerance

    def __str__(self):
        lines = [f"{name}: {err:.3e}" for name, err in sorted(self.errors.items())]
        lines.append(f"max: {self.max_error:.3e} ({'PASS' if self.passed else 'FAIL'})")
        return "\n".join(lines)


def _rel_err(a, n):
    return abs(a - n) / max(abs(a), abs(n), 1e-8)


def finite_diff_check(loss_fn, params, step=1e-4, tolerance=1e-4):
    """Compare analytic gradients of ``loss_fn()`` against central differences.

    ``loss_fn`` must be a deterministic zero-argument callable returning a
    scalar Tensor built from the current values of ``params``.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    params = list(params)
    for p in params:
        p.zero_grad()
    loss = loss_fn()
    base = loss.item()
    if abs(loss_fn().item() - base) > 0:
        raise RuntimeError("loss_fn is not deterministic")
    loss.backward()
    analytic = {p.name: (np.zeros_like(p.value) if p.grad is None else p.grad.copy())
                for p in params}

    errors = {}
    for p in params:
        worst = 0.0
        flat = p.value.ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            up = loss_fn().item()
            flat[i] = orig - step
            down = loss_fn().item()
            flat[i] = orig
            numeric = (up - down) / (2.0 * step)
            worst = max(worst, _rel_err(analytic[p.name].ravel()[i], numeric))
        errors[p.name] = worst
        p.zero_grad()
    return FiniteDiffReport(errors, tolerance)
