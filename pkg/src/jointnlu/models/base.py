"""Shared estimator plumbing: corpus coercion, the deterministic mini-batch
training loop, and checkpoint save/load glue."""

from __future__ import annotations

import logging

import numpy as np
from sklearn.base import BaseEstimator

from .. import checkpoint as ckpt
from ..corpus import Corpus, LabelVocab
from ..layers import make_optimizer

log = logging.getLogger(__name__)


class DivergenceError(RuntimeError):
    """Training loss became non-finite."""


class NotFittedError(RuntimeError):
    pass


def as_corpus(data):
    """Accept a Corpus or any iterable of TaggedSentence."""
    if isinstance(data, Corpus):
        return data
    return Corpus(sentences=list(data)).rebuild_vocabs()


class JointEstimator(BaseEstimator):
    """Base class for the neural model families.

    Subclasses implement ``_build(corpus, rng)``, ``_loss(sentence, mode,
    rng)``, ``_predict_one(tokens)``, ``parameters()`` and the checkpoint
    hooks ``kind`` / ``_config_dict`` / ``_vocab_dict`` / ``_rebuild``.
    """

    kind = None

    def fit(self, X, y=None, dev=None):
        corpus = as_corpus(X)
        if not len(corpus):
            raise ValueError("training corpus is empty")
        rng = np.random.default_rng(self.seed)
        self._build(corpus, rng)
        self.history_ = self._fit_loop(corpus, rng, dev=as_corpus(dev) if dev else None)
        return self

    def predict(self, X):
        """Per-sentence (tags, intent) predictions for token sequences."""
        self._check_fitted()
        out = []
        for tokens in X:
            tokens = tuple(getattr(tokens, "tokens", tokens))
            out.append(self._predict_one(tokens))
        return out

    def _check_fitted(self):
        if not hasattr(self, "tag_vocab_") and not hasattr(self, "intent_vocab_"):
            raise NotFittedError(f"{type(self).__name__} is not fitted")

    # -- training ----------------------------------------------------------

    def _fit_loop(self, corpus, rng, dev=None):
        params = self.parameters()
        names = [p.name for p in params]
        if len(set(names)) != len(names):
            raise ValueError("duplicate parameter names")
        optimizer = make_optimizer(self._optimizer_name(), params, self.lr)
        history = []
        best_dev = np.inf
        stale = 0
        patience = getattr(self, "patience", None)
        for epoch in range(self.epochs):
            order = rng.permutation(len(corpus.sentences))
            total = 0.0
            for lo in range(0, len(order), self.batch_size):
                batch = [corpus.sentences[i] for i in order[lo:lo + self.batch_size]]
                optimizer.zero_grad()
                batch_loss = 0.0
                for sent in batch:
                    loss = self._loss(sent, mode="train", rng=rng) / float(len(batch))
                    value = loss.item()
                    if not np.isfinite(value):
                        raise DivergenceError(
                            f"non-finite loss at epoch {epoch}: {value}")
                    loss.backward()
                    batch_loss += value
                optimizer.step()
                self._after_step()
                total += batch_loss * len(batch)
            entry = {"epoch": epoch, "train_loss": total / len(corpus.sentences)}
            if dev is not None:
                dev_loss = float(np.mean(
                    [self._loss(s, mode="eval", rng=None).item() for s in dev.sentences]))
                entry["dev_loss"] = dev_loss
                if patience is not None:
                    if dev_loss < best_dev - 1e-9:
                        best_dev, stale = dev_loss, 0
                    else:
                        stale += 1
                        if stale > patience:
                            history.append(entry)
                            log.info("early stop at epoch %d", epoch)
                            break
            history.append(entry)
            log.debug("epoch %d: %s", epoch, entry)
        return history

    def _after_step(self):
        """Hook for constraint re-pinning (CRF transition sentinels)."""

    def _optimizer_name(self):
        return self.optimizer

    def all_parameters(self):
        """Trainable parameters plus any frozen tables that belong in a
        checkpoint."""
        return self.parameters()

    # -- checkpointing -----------------------------------------------------

    def _arrays(self):
        return {p.name: p.value for p in self.all_parameters()}

    def save(self, path):
        self._check_fitted()
        ckpt.save(path, self.kind, self._config_dict(), self._vocab_dict(),
                  self._arrays())

    @classmethod
    def _restore_params(cls, model, arrays):
        params = {p.name: p for p in model.all_parameters()}
        missing = set(params) - set(arrays)
        extra = set(arrays) - set(params)
        if missing or extra:
            raise ckpt.CheckpointError(
                f"parameter mismatch: missing {sorted(missing)}, extra {sorted(extra)}")
        for name, p in params.items():
            arr = arrays[name].astype(np.float64)
            if arr.shape != p.value.shape:
                raise ckpt.CheckpointError(
                    f"shape mismatch for {name}: {arr.shape} vs {p.value.shape}")
            p.value[...] = arr
        model._after_step()
        return model


def vocab_from_labels(labels):
    return LabelVocab(labels)
