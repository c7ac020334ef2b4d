"""One-against-all linear SVM intent classifier over sentence-mean embedding
features, trained by hinge-loss subgradient descent with L2 regularization."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .. import checkpoint as ckpt
from ..corpus import LabelVocab
from ..embeddings import EmbeddingTable, random_table
from ..numerics import Parameter, Tensor
from .base import NotFittedError, as_corpus


class DegenerateTrainingError(ValueError):
    """Raised when the corpus has fewer than two intent classes."""


class SvmIntentClassifier(BaseEstimator):
    """M binary linear classifiers (class vs rest); prediction takes the
    largest decision value w_i . x + b_i, ties to the lowest class index."""

    kind = "svm"

    def __init__(self, embeddings=None, embedding_dim=50, epochs=30, lr=0.01,
                 C=1.0, batch_size=32, seed=42):
        self.embeddings = embeddings
        self.embedding_dim = embedding_dim
        self.epochs = epochs
        self.lr = lr
        self.C = C
        self.batch_size = batch_size
        self.seed = seed

    def _build_from_vocabs(self, vocabs, rng=None):
        self.intent_vocab_ = LabelVocab(vocabs["intents"])
        if isinstance(self.embeddings, EmbeddingTable):
            self.table_ = self.embeddings
        else:
            self.table_ = random_table(vocabs["words"], self.embedding_dim,
                                       self.seed)
        m, d = len(self.intent_vocab_), self.table_.dim
        self.W = Parameter("svm.W", np.zeros((m, d)))
        self.b = Parameter("svm.b", np.zeros(m))
        # feature standardization fitted on the training set
        self.feat_mean = Parameter("svm.feat_mean", np.zeros(d))
        self.feat_scale = Parameter("svm.feat_scale", np.ones(d))
        self._vocabs = dict(vocabs)

    def features(self, tokens):
        raw = self.table_.sentence_mean(list(tokens))
        return (raw - self.feat_mean.value) / self.feat_scale.value

    def fit(self, X, y=None):
        corpus = as_corpus(X)
        if len(corpus.intent_vocab) < 2:
            raise DegenerateTrainingError(
                "one-against-all training needs at least 2 intent classes")
        words = list(self.embeddings.index) \
            if isinstance(self.embeddings, EmbeddingTable) else corpus.word_list()
        self._build_from_vocabs({
            "intents": list(corpus.intent_vocab.labels),
            "words": words,
        })
        raw = np.stack([self.table_.sentence_mean(list(s.tokens))
                        for s in corpus.sentences])
        self.feat_mean.value[...] = raw.mean(axis=0)
        self.feat_scale.value[...] = np.maximum(raw.std(axis=0), 1e-12)
        feats = np.stack([self.features(s.tokens) for s in corpus.sentences])
        labels = np.array([self.intent_vocab_[s.intent_key]
                           for s in corpus.sentences])
        rng = np.random.default_rng(self.seed)
        n = len(labels)
        for _ in range(self.epochs):
            for i in rng.permutation(n):
                x, cls = feats[i], labels[i]
                for m in range(len(self.intent_vocab_)):
                    sign = 1.0 if m == cls else -1.0
                    margin = sign * (self.W.value[m] @ x + self.b.value[m])
                    # per-sample split of the L2 term keeps the epoch-level
                    # regularization at ||w||^2 / (2C)
                    self.W.value[m] -= self.lr * self.W.value[m] / (self.C * n)
                    if margin < 1.0:
                        self.W.value[m] += self.lr * sign * x
                        self.b.value[m] += self.lr * sign
        return self

    def decision_function(self, tokens):
        self._check_fitted()
        x = self.features(tokens)
        return self.W.value @ x + self.b.value

    def predict(self, X):
        """Intent label per token sequence."""
        out = []
        for tokens in X:
            tokens = tuple(getattr(tokens, "tokens", tokens))
            values = self.decision_function(tokens)
            out.append(self.intent_vocab_.label(int(np.argmax(values))))
        return out

    def objective(self, feats, labels):
        """Differentiable training objective (for gradient checking):
        sum over classes of ||w||^2/(2C) + mean hinge."""
        feats = np.asarray(feats, dtype=np.float64)
        labels = np.asarray(labels)
        total = None
        for m in range(len(self.intent_vocab_)):
            signs = np.where(labels == m, 1.0, -1.0)
            w_m = self.W[m]
            margins = Tensor(feats) @ w_m + self.b[m]
            hinge = (1.0 - Tensor(signs) * margins).relu().mean()
            reg = (w_m * w_m).sum() / (2.0 * self.C)
            term = reg + hinge
            total = term if total is None else total + term
        return total

    def _check_fitted(self):
        if not hasattr(self, "intent_vocab_"):
            raise NotFittedError("SvmIntentClassifier is not fitted")

    # -- checkpointing -----------------------------------------------------

    def parameters(self):
        return [self.W, self.b, self.feat_mean, self.feat_scale]

    def all_parameters(self):
        # the table is part of the decision function even though training
        # never updates it
        return self.parameters() + [self.table_.matrix]

    def save(self, path):
        self._check_fitted()
        arrays = {p.name: p.value for p in self.all_parameters()}
        ckpt.save(path, self.kind, self._config_dict(), self._vocab_dict(), arrays)

    def _config_dict(self):
        return {"embedding_dim": self.table_.dim, "epochs": self.epochs,
                "lr": self.lr, "C": self.C, "seed": self.seed,
                "embeddings_trainable": self.table_.trainable}

    def _vocab_dict(self):
        return dict(self._vocabs)
