"""LSTM cell, bidirectional encoder, and the CNN/LSTM character composers."""

from __future__ import annotations

import numpy as np

from .embeddings import PAD_CHAR
from .layers import dropout, glorot
from .numerics import Parameter, Tensor

CHAR_CAP = 30


class LSTMCell:
    """Single-layer LSTM cell with a packed weight matrix.

    W has shape (4*hidden, hidden + input + 1); row blocks are ordered
    (input gate i, forget gate f, output gate o, candidate g) and the final
    column multiplies the constant 1 (bias).
    """

    def __init__(self, name, input_dim, hidden, rng):
        self.input_dim = input_dim
        self.hidden = hidden
        self.W = Parameter(
            f"{name}.W",
            glorot(rng, hidden + input_dim + 1, hidden,
                   shape=(4 * hidden, hidden + input_dim + 1)))

    def initial_state(self):
        zero = Tensor(np.zeros(self.hidden))
        return zero, zero

    def step(self, x, state):
        """One recurrence: gates from concat(h_prev, x, 1); returns (h, c)."""
        h_prev, c_prev = state
        x = Tensor.of(x)
        if x.value.shape != (self.input_dim,):
            raise ValueError(f"cell expects input of width {self.input_dim}, got {x.value.shape}")
        z = Tensor.concat([h_prev, x, Tensor(np.ones(1))])
        pre = self.W @ z
        H = self.hidden
        i = pre[0:H].sigmoid()
        f = pre[H:2 * H].sigmoid()
        o = pre[2 * H:3 * H].sigmoid()
        g = pre[3 * H:4 * H].tanh()
        c = f * c_prev + i * g
        h = o * c.tanh()
        return h, c

    def run(self, seq):
        """Run over a sequence of input vectors from the zero state; returns
        the list of hidden states."""
        state = self.initial_state()
        hs = []
        for x in seq:
            state = self.step(x, state)
            hs.append(state[0])
        return hs

    def parameters(self):
        return [self.W]


def lstm_cell_step(cell, x, state):
    return cell.step(x, state)


def bilstm_encode(fwd, bwd, seq):
    """Independent forward and backward passes over ``seq``; returns the
    per-position concatenations plus (last forward h, last backward h)."""
    if not seq:
        raise ValueError("bilstm_encode of empty sequence")
    hs_f = fwd.run(seq)
    hs_b = bwd.run(list(reversed(seq)))
    hs_b.reverse()
    out = [Tensor.concat([hf, hb]) for hf, hb in zip(hs_f, hs_b)]
    return out, (hs_f[-1], hs_b[0])


def _clean_chars(word):
    """Drop explicit pad characters and apply the character-length cap."""
    chars = [c for c in word if c != PAD_CHAR][:CHAR_CAP]
    return chars or [PAD_CHAR]


class CharCNNComposer:
    """Word vector from characters: embed (dim 10), 1-D convolution with 10
    filters of kernel size 3 and stride 1 (same-padding with a dedicated pad
    character), max-over-time pooling, dropout 0.5 in train mode."""

    def __init__(self, table, rng, filters=10, kernel=3, dropout_rate=0.5,
                 name="char_cnn"):
        self.table = table
        self.filters = filters
        self.kernel = kernel
        self.dropout_rate = dropout_rate
        width = kernel * table.dim
        self.W = Parameter(f"{name}.W", glorot(rng, width, filters,
                                               shape=(filters, width)))
        self.b = Parameter(f"{name}.b", np.zeros(filters))

    @property
    def out_dim(self):
        return self.filters

    def __call__(self, word, mode="eval", rng=None):
        chars = _clean_chars(word)
        pad = (self.kernel - 1) // 2
        padded = [PAD_CHAR] * pad + chars + [PAD_CHAR] * pad
        emb = self.table.rows(padded)  # (len+2*pad, dim)
        windows = Tensor.stack([
            emb[t:t + self.kernel].reshape(self.kernel * self.table.dim)
            for t in range(len(chars))
        ])  # (len, kernel*dim)
        feats = windows @ self.W.T + self.b  # (len, filters)
        pooled = feats.max(axis=0)
        return dropout(pooled, self.dropout_rate, mode, rng=rng)

    def parameters(self):
        params = [self.W, self.b]
        if self.table.trainable:
            params.append(self.table.matrix)
        return params


class CharLSTMComposer:
    """Word vector from characters: embed (dim 20), run an LSTM (hidden 20),
    return the final hidden state."""

    def __init__(self, table, rng, hidden=20, name="char_lstm"):
        self.table = table
        self.cell = LSTMCell(name, table.dim, hidden, rng)

    @property
    def out_dim(self):
        return self.cell.hidden

    def __call__(self, word, mode="eval", rng=None):
        chars = _clean_chars(word)
        emb = self.table.rows(chars)
        return self.cell.run([emb[t] for t in range(len(chars))])[-1]

    def parameters(self):
        params = self.cell.parameters()
        if self.table.trainable:
            params.append(self.table.matrix)
        return params


def char_cnn_compose(table, word, composer, mode="eval", rng=None):
    return composer(word, mode=mode, rng=rng)


def char_lstm_compose(table, word, composer):
    return composer(word)
