"""Unified joint model: a shared Bi-LSTM feeds both a CRF entity head and a
softmax intent head on the concatenated final hidden states. Training
minimizes the unweighted sum of the two losses."""

from __future__ import annotations

import numpy as np

from .. import crf
from ..corpus import LabelVocab
from ..layers import Linear, cross_entropy
from ..numerics import Tensor
from .ner import BiLstmCrfTagger


class UnifiedTagger(BiLstmCrfTagger):
    kind = "unified"

    def _resolved(self):
        default_hidden, _ = super()._resolved()
        return (self.hidden or 100, self.optimizer or "adam")

    def _build(self, corpus, rng):
        super()._build(corpus, rng)
        self._attach_intent_head(list(corpus.intent_vocab.labels), rng)
        self._vocabs["intents"] = list(corpus.intent_vocab.labels)

    def _build_from_vocabs(self, vocabs, rng):
        super()._build_from_vocabs(vocabs, rng)
        if "intents" in vocabs:
            self._attach_intent_head(vocabs["intents"], rng)

    def _attach_intent_head(self, intents, rng):
        self.intent_vocab_ = LabelVocab(intents)
        self.intent_head_ = Linear("intent", self.encoder_.out_dim,
                                   len(self.intent_vocab_), rng)

    def _forward(self, tokens, mode="eval", rng=None):
        """(emission scores P, intent probability distribution)."""
        vecs = self.repr_(tokens, mode=mode, rng=rng)
        states, (h_fwd, h_bwd) = self.encoder_(vecs)
        P = Tensor.stack([self.emit_(h) for h in states])
        h_u = Tensor.concat([h_fwd, h_bwd])
        y_u = self.intent_head_(h_u).softmax()
        return P, y_u

    def _loss(self, sentence, mode="train", rng=None):
        P, y_u = self._forward(sentence.tokens, mode=mode, rng=rng)
        gold_tags = [self.tag_vocab_[t] for t in sentence.tags]
        entity_loss = crf.nll_loss(P, self.transitions_.A, gold_tags)
        gold_intent = np.zeros(len(self.intent_vocab_))
        gold_intent[self.intent_vocab_[sentence.intent_key]] = 1.0
        return entity_loss + cross_entropy(y_u, gold_intent)

    def _predict_one(self, tokens):
        P, y_u = self._forward(tokens)
        path, _ = crf.viterbi_decode(P, self.transitions_.A)
        tags = [self.tag_vocab_.label(i) for i in path]
        intent = self.intent_vocab_.label(int(np.argmax(y_u.value)))
        return tags, intent

    def parameters(self):
        return super().parameters() + self.intent_head_.parameters()
