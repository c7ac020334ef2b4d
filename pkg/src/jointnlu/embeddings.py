"""Word and character embedding tables: file loading (word2vec/glove text
formats), OOV-safe lookup, sentence-mean features, random initialization."""

from __future__ import annotations

import numpy as np

from .numerics import Parameter

UNK = "<unk>"
PAD_CHAR = "\x00"


class EmbeddingParseError(ValueError):
    """Malformed vector file; message carries the offending line number."""


class EmbeddingTable:
    """word -> row of a dense matrix; row 0 is the UNK vector.

    Tables loaded from files are frozen by default; randomly initialized
    tables are trainable. The matrix is a Parameter either way so models can
    opt in to fine-tuning.
    """

    def __init__(self, dim, words, matrix, trainable=False, name="word_embeddings"):
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.shape != (len(words) + 1, dim):
            raise ValueError("matrix must have one row per word plus the UNK row")
        self.dim = dim
        self.index = {w: i + 1 for i, w in enumerate(words)}
        if len(self.index) != len(words):
            raise ValueError("duplicate words in table")
        self.matrix = Parameter(name, matrix)
        self.trainable = trainable

    def row(self, token):
        return self.index.get(token, 0)

    def lookup(self, token):
        """Exact-match vector, else the UNK vector. Total function."""
        return self.matrix.value[self.row(token)]

    def rows(self, tokens):
        """Differentiable gather of per-token rows (len(tokens) x dim)."""
        idx = np.array([self.row(t) for t in tokens])
        return self.matrix[idx]

    def sentence_mean(self, tokens):
        """Arithmetic mean of per-token lookups."""
        if not tokens:
            raise ValueError("sentence_mean of empty token sequence")
        return np.mean([self.lookup(t) for t in tokens], axis=0)

    def save(self, path):
        """Write in glove-text format, UNK row excluded."""
        with open(path, "w", encoding="utf-8") as fh:
            for word, i in self.index.items():
                fields = " ".join(repr(float(x)) for x in self.matrix.value[i])
                fh.write(f"{word} {fields}\n")


class CharTable(EmbeddingTable):
    """Character table; unknown characters map to the dedicated UNK row and
    the pad character has its own entry."""

    def __init__(self, dim, chars, matrix, trainable=True, name="char_embeddings"):
        super().__init__(dim, chars, matrix, trainable=trainable, name=name)


def load_vectors(path, format="word2vec-text", trainable=False):
    """Load a text-format vector file into a frozen EmbeddingTable.

    word2vec-text has a ``<count> <dim>`` header line; glove-text has none
    and the dimension is inferred from the first row. The UNK vector is the
    mean of all loaded vectors.
    """
    if format not in ("word2vec-text", "glove-text"):
        raise ValueError(f"unknown vector format {format!r}")
    words = []
    rows = []
    dim = None
    with open(path, encoding="utf-8") as fh:
        lines = enumerate(fh, start=1)
        if format == "word2vec-text":
            try:
                lineno, header = next(lines)
            except StopIteration:
                raise EmbeddingParseError("line 1: missing word2vec header") from None
            parts = header.split()
            if len(parts) != 2:
                raise EmbeddingParseError(f"line 1: expected '<count> <dim>' header")
            try:
                _, dim = int(parts[0]), int(parts[1])
            except ValueError:
                raise EmbeddingParseError("line 1: non-integer header field") from None
        for lineno, raw in lines:
            parts = raw.rstrip("\n").split(" ")
            parts = [p for p in parts if p]
            if not parts:
                continue
            word, fields = parts[0], parts[1:]
            if dim is None:
                dim = len(fields)
            if len(fields) != dim:
                raise EmbeddingParseError(
                    f"line {lineno}: row width {len(fields)} != {dim}")
            try:
                rows.append([float(x) for x in fields])
            except ValueError:
                raise EmbeddingParseError(f"line {lineno}: non-numeric field") from None
            words.append(word)
    if dim is None:
        raise EmbeddingParseError("empty vector file")
    data = np.asarray(rows, dtype=np.float64)
    unk = data.mean(axis=0) if len(rows) else np.zeros(dim)
    return EmbeddingTable(dim, words, np.vstack([unk[None, :], data]),
                          trainable=trainable)


def random_table(items, dim, seed, kind="word", name=None):
    """Trainable table with entries i.i.d. uniform in [-0.5/dim, +0.5/dim].

    ``items`` is a word list, character list, or LabelVocab-like object with
    ``labels``.
    """
    if dim <= 0:
        raise ValueError("dim must be positive")
    labels = list(getattr(items, "labels", items))
    rng = np.random.default_rng(seed)
    half = 0.5 / dim
    matrix = rng.uniform(-half, half, size=(len(labels) + 1, dim))
    cls = CharTable if kind == "char" else EmbeddingTable
    return cls(dim, labels, matrix, trainable=True,
               name=name or f"{kind}_embeddings")


def load_contextual_vectors(path):
    """Per-token precomputed vectors keyed by (sentence_id, token_index).

    One line per token: ``<sentence_id>\\t<token_index>\\t<float> <float>...``.
    """
    table = {}
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise EmbeddingParseError(
                    f"line {lineno}: expected '<sid>\\t<idx>\\t<floats>'")
            try:
                sid, idx = parts[0], int(parts[1])
                vec = np.array([float(x) for x in parts[2].split()], dtype=np.float64)
            except ValueError:
                raise EmbeddingParseError(f"line {lineno}: non-numeric field") from None
            if dim is None:
                dim = vec.size
            elif vec.size != dim:
                raise EmbeddingParseError(f"line {lineno}: row width {vec.size} != {dim}")
            table[(sid, idx)] = vec
    return table
