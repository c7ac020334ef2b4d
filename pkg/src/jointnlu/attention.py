"""Scaled dot-product and multi-head attention, transformer encoder blocks,
sinusoidal positional encoding, label attention, and the co-interactive
layer connecting entity and intent streams."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .layers import LayerNorm, Linear
from .numerics import Parameter, ShapeError, Tensor
from .layers import glorot


@dataclass(frozen=True)
class AttentionConfig:
    d_model: int = 64
    heads: int = 2
    layers: int = 2
    d_ff: int = 128

    def __post_init__(self):
        if min(self.d_model, self.heads, self.layers, self.d_ff) <= 0:
            raise ValueError("attention dimensions must be positive")
        if self.d_model % self.heads:
            raise ValueError("d_model must be divisible by the head count")

    @property
    def d_k(self):
        return self.d_model // self.heads

    @property
    def d_v(self):
        return self.d_model // self.heads


def scaled_dot_attention(Q, K, V):
    """softmax(Q K^T / sqrt(d_k)) V; returns (output, weights)."""
    Q, K, V = Tensor.of(Q), Tensor.of(K), Tensor.of(V)
    if Q.value.shape[-1] != K.value.shape[-1]:
        raise ShapeError("query and key widths differ")
    if K.value.shape[0] != V.value.shape[0]:
        raise ShapeError("key and value row counts differ")
    d_k = Q.value.shape[-1]
    weights = ((Q @ K.T) / np.sqrt(d_k)).softmax(axis=-1)
    return weights @ V, weights


class MultiHeadAttention:
    """Heads computed on independently projected Q/K/V, concatenated, and
    output-projected."""

    def __init__(self, name, config, rng):
        self.config = config
        d, dk = config.d_model, config.d_k
        self.proj = []
        for h in range(config.heads):
            self.proj.append((
                Parameter(f"{name}.h{h}.Wq", glorot(rng, d, dk, shape=(d, dk))),
                Parameter(f"{name}.h{h}.Wk", glorot(rng, d, dk, shape=(d, dk))),
                Parameter(f"{name}.h{h}.Wv", glorot(rng, d, dk, shape=(d, dk))),
            ))
        self.Wo = Parameter(f"{name}.Wo", glorot(rng, d, d, shape=(d, d)))

    def __call__(self, Q, K, V):
        Q, K, V = Tensor.of(Q), Tensor.of(K), Tensor.of(V)
        heads = []
        for Wq, Wk, Wv in self.proj:
            out, _ = scaled_dot_attention(Q @ Wq, K @ Wk, V @ Wv)
            heads.append(out)
        return Tensor.concat(heads, axis=1) @ self.Wo

    def parameters(self):
        out = [self.Wo]
        for triple in self.proj:
            out.extend(triple)
        return out


class EncoderBlock:
    """Post-LN transformer encoder layer: LN(X + SelfAttn(X)) then
    LN(. + FFN(.)); FFN is linear -> ReLU -> linear."""

    def __init__(self, name, config, rng):
        self.attn = MultiHeadAttention(f"{name}.attn", config, rng)
        self.ln1 = LayerNorm(f"{name}.ln1", config.d_model)
        self.ln2 = LayerNorm(f"{name}.ln2", config.d_model)
        self.ff1 = Linear(f"{name}.ff1", config.d_model, config.d_ff, rng)
        self.ff2 = Linear(f"{name}.ff2", config.d_ff, config.d_model, rng)

    def __call__(self, X):
        X = Tensor.of(X)
        h = self.ln1(X + self.attn(X, X, X))
        return self.ln2(h + self.ff2(self.ff1(h).relu()))

    def parameters(self):
        return (self.attn.parameters() + self.ln1.parameters()
                + self.ln2.parameters() + self.ff1.parameters()
                + self.ff2.parameters())


class EncoderStack:
    def __init__(self, name, config, rng):
        self.blocks = [EncoderBlock(f"{name}.{i}", config, rng)
                       for i in range(config.layers)]

    def __call__(self, X):
        for block in self.blocks:
            X = block(X)
        return X

    def parameters(self):
        return [p for b in self.blocks for p in b.parameters()]


def positional_encoding(n, d_model):
    """Sinusoidal position encodings, shape (n, d_model); added to inputs."""
    if n < 1 or d_model < 1:
        raise ValueError("positional_encoding needs n, d >= 1")
    pos = np.arange(n)[:, None]
    i = np.arange(d_model)[None, :]
    angle = pos / np.power(10000.0, (2 * (i // 2)) / d_model)
    pe = np.where(i % 2 == 0, np.sin(angle), np.cos(angle))
    return pe


def label_attention(H, W_v):
    """Token-over-label attention: A = softmax(H W_v) rowwise over the label
    columns; returns H + A W_v^T (residual, n x d)."""
    H = Tensor.of(H)
    W_v = Tensor.of(W_v)
    if H.value.shape[1] != W_v.value.shape[0]:
        raise ShapeError("hidden width and label-embedding rows differ")
    A = (H @ W_v).softmax(axis=-1)
    return H + A @ W_v.T


class CoInteractiveLayer:
    """Mirrored cross-attention between the entity stream H_S and the intent
    stream H_I, each followed by residual + layer normalization."""

    def __init__(self, name, d, rng):
        self.d = d
        mk = lambda nm: Parameter(f"{name}.{nm}", glorot(rng, d, d, shape=(d, d)))
        self.Wq_s, self.Wk_s, self.Wv_s = mk("Wq_s"), mk("Wk_s"), mk("Wv_s")
        self.Wq_i, self.Wk_i, self.Wv_i = mk("Wq_i"), mk("Wk_i"), mk("Wv_i")
        self.ln_s = LayerNorm(f"{name}.ln_s", d)
        self.ln_i = LayerNorm(f"{name}.ln_i", d)

    def __call__(self, H_S, H_I):
        H_S, H_I = Tensor.of(H_S), Tensor.of(H_I)
        if H_S.value.shape != H_I.value.shape:
            raise ShapeError("entity and intent streams must share shape")
        C_S, _ = scaled_dot_attention(H_S @ self.Wq_s, H_I @ self.Wk_i, H_I @ self.Wv_i)
        C_I, _ = scaled_dot_attention(H_I @ self.Wq_i, H_S @ self.Wk_s, H_S @ self.Wv_s)
        return self.ln_s(H_S + C_S), self.ln_i(H_I + C_I)

    def parameters(self):
        return ([self.Wq_s, self.Wk_s, self.Wv_s,
                 self.Wq_i, self.Wk_i, self.Wv_i]
                + self.ln_s.parameters() + self.ln_i.parameters())


def co_interactive(H_S, H_I, layer):
    return layer(H_S, H_I)
