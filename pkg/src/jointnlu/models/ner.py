"""Bi-LSTM-CRF named-entity tagger, optionally with CNN or LSTM character
composers."""

from __future__ import annotations

from .. import crf
from ..corpus import LabelVocab
from ..embeddings import EmbeddingTable, random_table
from ..layers import Linear
from ..numerics import Tensor
from .base import JointEstimator
from .encoder import (BiLstmEncoder, WordRepresenter, build_char_composer,
                      corpus_alphabet)

# hidden units and optimizer per char-composer choice: 100/rms-prop without
# character features, 50/adam with them
_DEFAULTS = {
    "none": (100, "rmsprop"),
    "cnn": (50, "adam"),
    "lstm": (50, "adam"),
}


class BiLstmCrfTagger(JointEstimator):
    """Word vectors (plus optional char features) -> Bi-LSTM -> linear tag
    scores -> linear-chain CRF. Decoding is exact Viterbi."""

    kind = "bilstm-crf"

    def __init__(self, hidden=None, char_composer="none", embeddings=None,
                 embedding_dim=50, lr=0.001, optimizer=None, epochs=30,
                 batch_size=32, seed=42, patience=None):
        self.hidden = hidden
        self.char_composer = char_composer
        self.embeddings = embeddings
        self.embedding_dim = embedding_dim
        self.lr = lr
        self.optimizer = optimizer
        self.epochs = epochs
        self.batch_size = batch_size
        self.seed = seed
        self.patience = patience

    def _resolved(self):
        default_hidden, default_opt = _DEFAULTS[self.char_composer or "none"]
        return (self.hidden or default_hidden, self.optimizer or default_opt)

    def _optimizer_name(self):
        return self._resolved()[1]

    def _word_list(self, corpus):
        if isinstance(self.embeddings, EmbeddingTable):
            return list(self.embeddings.index)
        return corpus.word_list()

    def _make_table(self, words):
        if isinstance(self.embeddings, EmbeddingTable):
            return self.embeddings
        return random_table(words, self.embedding_dim, self.seed)

    def _build(self, corpus, rng):
        vocabs = {"tags": list(corpus.tag_vocab.labels),
                  "words": self._word_list(corpus)}
        if (self.char_composer or "none") != "none":
            vocabs["chars"] = corpus_alphabet(corpus)
        self._build_from_vocabs(vocabs, rng)

    def _build_from_vocabs(self, vocabs, rng):
        hidden, _ = self._resolved()
        self.tag_vocab_ = LabelVocab(vocabs["tags"])
        self.table_ = self._make_table(vocabs["words"])
        self.composer_ = build_char_composer(self.char_composer,
                                             vocabs.get("chars", []),
                                             self.seed + 1, rng)
        self.repr_ = WordRepresenter(self.table_, self.composer_)
        self.encoder_ = BiLstmEncoder("encoder", self.repr_.dim, hidden, rng)
        k = len(self.tag_vocab_)
        self.emit_ = Linear("emit", self.encoder_.out_dim, k, rng)
        self.transitions_ = crf.TransitionMatrix(k, rng=rng)
        self._vocabs = dict(vocabs)

    def _after_step(self):
        self.transitions_.fix_constraints()

    def emissions(self, tokens, mode="eval", rng=None):
        """Tag-score matrix P (n x k) for one sentence."""
        vecs = self.repr_(tokens, mode=mode, rng=rng)
        states, _ = self.encoder_(vecs)
        return Tensor.stack([self.emit_(h) for h in states])

    def _loss(self, sentence, mode="train", rng=None):
        P = self.emissions(sentence.tokens, mode=mode, rng=rng)
        gold = [self.tag_vocab_[t] for t in sentence.tags]
        return crf.nll_loss(P, self.transitions_.A, gold)

    def _predict_one(self, tokens):
        P = self.emissions(tokens)
        path, _ = crf.viterbi_decode(P, self.transitions_.A)
        return [self.tag_vocab_.label(i) for i in path], None

    def predict_tags(self, X):
        return [tags for tags, _ in self.predict(X)]

    def parameters(self):
        return (self.repr_.parameters() + self.encoder_.parameters()
                + self.emit_.parameters() + self.transitions_.parameters())

    def all_parameters(self):
        params = list(self.parameters())
        if not self.table_.trainable:
            params.append(self.table_.matrix)
        return params

    def _config_dict(self):
        hidden, opt = self._resolved()
        return {"hidden": hidden, "char_composer": self.char_composer or "none",
                "embedding_dim": self.table_.dim, "lr": self.lr,
                "optimizer": opt, "epochs": self.epochs,
                "batch_size": self.batch_size, "seed": self.seed,
                "embeddings_trainable": self.table_.trainable}

    def _vocab_dict(self):
        return dict(self._vocabs)
