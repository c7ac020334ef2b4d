"""Feed-forward building blocks and optimizers: linear maps, layer norm,
inverted dropout, cross-entropy, Adam, RMSProp."""

from __future__ import annotations

import numpy as np

from .numerics import Parameter, Tensor

PROB_CLAMP = 1e-12


def glorot(rng, n_in, n_out, shape=None):
    limit = np.sqrt(6.0 / (n_in + n_out))
    return rng.uniform(-limit, limit, size=shape or (n_out, n_in))


class Linear:
    """Affine map Wx + b; W is (out, in), biases start at zero."""

    def __init__(self, name, n_in, n_out, rng):
        self.n_in = n_in
        self.n_out = n_out
        self.W = Parameter(f"{name}.W", glorot(rng, n_in, n_out))
        self.b = Parameter(f"{name}.b", np.zeros(n_out))

    def __call__(self, x):
        x = Tensor.of(x)
        if x.value.shape[-1] != self.n_in:
            raise ValueError(f"linear expects width {self.n_in}, got {x.value.shape}")
        if x.value.ndim == 1:
            return self.W @ x + self.b
        return x @ self.W.T + self.b

    def parameters(self):
        return [self.W, self.b]


class LayerNorm:
    """Per-row normalization with learned gain and bias; population variance."""

    def __init__(self, name, dim, epsilon=1e-6):
        if epsilon <= 0:
            raise ValueError("epsilon must be positive")
        self.dim = dim
        self.epsilon = epsilon
        self.gain = Parameter(f"{name}.gain", np.ones(dim))
        self.bias = Parameter(f"{name}.bias", np.zeros(dim))

    def __call__(self, x):
        x = Tensor.of(x)
        mu = x.mean(axis=-1, keepdims=True)
        centered = x - mu
        var = (centered * centered).mean(axis=-1, keepdims=True)
        normed = centered / (var + self.epsilon).sqrt()
        return normed * self.gain + self.bias

    def parameters(self):
        return [self.gain, self.bias]


def layer_norm(params, x):
    """Functional form over a LayerNorm parameter holder."""
    return params(x)


def dropout(x, p, mode, rng=None):
    """Inverted dropout: zero with probability p, survivors scaled by
    1/(1-p). Identity in eval mode or at p == 0."""
    if not 0.0 <= p < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {p}")
    x = Tensor.of(x)
    if mode == "eval" or p == 0.0:
        return x
    if mode != "train":
        raise ValueError(f"unknown dropout mode {mode!r}")
    if rng is None:
        raise ValueError("train-mode dropout needs an rng")
    mask = (rng.random(x.value.shape) >= p) / (1.0 - p)
    return x * Tensor(mask)


def cross_entropy(predicted, gold):
    """-sum(gold * ln predicted) with the prediction clamped at 1e-12."""
    predicted = Tensor.of(predicted)
    gold = np.asarray(gold, dtype=np.float64)
    if predicted.value.shape != gold.shape:
        raise ValueError("predicted and gold lengths differ")
    return -(Tensor(gold) * predicted.clip_min(PROB_CLAMP).log()).sum()


class Adam:
    """Adam with bias correction; beta1=0.9, beta2=0.999, eps=1e-8."""

    def __init__(self, params, lr=0.001, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(params)
        self.lr = lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.t = 0
        self.m = {p.name: np.zeros_like(p.value) for p in self.params}
        self.v = {p.name: np.zeros_like(p.value) for p in self.params}

    def step(self):
        self.t += 1
        for p in self.params:
            if p.grad is None:
                continue
            m = self.m[p.name]
            v = self.v[p.name]
            m *= self.beta1
            m += (1 - self.beta1) * p.grad
            v *= self.beta2
            v += (1 - self.beta2) * p.grad**2
            m_hat = m / (1 - self.beta1**self.t)
            v_hat = v / (1 - self.beta2**self.t)
            p.value -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)

    def zero_grad(self):
        for p in self.params:
            p.zero_grad()


class RMSProp:
    """RMSProp with decay 0.9, eps=1e-8."""

    def __init__(self, params, lr=0.001, decay=0.9, eps=1e-8):
        self.params = list(params)
        self.lr = lr
        self.decay, self.eps = decay, eps
        self.v = {p.name: np.zeros_like(p.value) for p in self.params}

    def step(self):
        for p in self.params:
            if p.grad is None:
                continue
            v = self.v[p.name]
            v *= self.decay
            v += (1 - self.decay) * p.grad**2
            p.value -= self.lr * p.grad / (np.sqrt(v) + self.eps)

    def zero_grad(self):
        for p in self.params:
            p.zero_grad()


def make_optimizer(name, params, lr):
    if name == "adam":
        return Adam(params, lr=lr)
    if name in ("rmsprop", "rms-prop"):
        return RMSProp(params, lr=lr)
    raise ValueError(f"unknown optimizer {name!r}")
