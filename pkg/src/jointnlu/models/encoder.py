"""Word-representation and BiLSTM encoding pieces shared by the recurrent
model families."""

from __future__ import annotations

from ..embeddings import random_table
from ..numerics import Tensor
from ..recurrent import CharCNNComposer, CharLSTMComposer, LSTMCell, bilstm_encode

CHAR_CNN_DIM = 10
CHAR_LSTM_DIM = 20


def corpus_alphabet(corpus):
    return sorted({c for s in corpus for tok in s.tokens for c in tok})


def build_char_composer(kind, chars, rng_seed, rng):
    """None, or the CNN/LSTM character composer over the given alphabet."""
    if kind in (None, "none"):
        return None
    if kind == "cnn":
        table = random_table(chars, CHAR_CNN_DIM, rng_seed, kind="char")
        return CharCNNComposer(table, rng)
    if kind == "lstm":
        table = random_table(chars, CHAR_LSTM_DIM, rng_seed, kind="char")
        return CharLSTMComposer(table, rng)
    raise ValueError(f"unknown char composer {kind!r}")


class WordRepresenter:
    """Per-token vectors: word embedding, optionally concatenated with the
    character-composer output."""

    def __init__(self, table, char_composer=None):
        self.table = table
        self.char_composer = char_composer

    @property
    def dim(self):
        extra = self.char_composer.out_dim if self.char_composer else 0
        return self.table.dim + extra

    def __call__(self, tokens, mode="eval", rng=None):
        rows = self.table.rows(tokens)
        vecs = [rows[i] for i in range(len(tokens))]
        if self.char_composer is not None:
            vecs = [Tensor.concat([v, self.char_composer(tok, mode=mode, rng=rng)])
                    for v, tok in zip(vecs, tokens)]
        return vecs

    def parameters(self):
        params = [self.table.matrix] if self.table.trainable else []
        if self.char_composer is not None:
            params.extend(self.char_composer.parameters())
        return params


class BiLstmEncoder:
    """Forward/backward LSTM pair with independent parameters."""

    def __init__(self, name, input_dim, hidden, rng):
        self.hidden = hidden
        self.fwd = LSTMCell(f"{name}.fwd", input_dim, hidden, rng)
        self.bwd = LSTMCell(f"{name}.bwd", input_dim, hidden, rng)

    @property
    def out_dim(self):
        return 2 * self.hidden

    def __call__(self, vecs):
        return bilstm_encode(self.fwd, self.bwd, vecs)

    def parameters(self):
        return self.fwd.parameters() + self.bwd.parameters()
