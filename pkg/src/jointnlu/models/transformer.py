"""Transformer-based joint model: a synthetic CLS token is prepended, the
encoder output at position 0 predicts the intent, and per-token outputs
predict slot labels (softmax cross-entropy, or a CRF head when enabled)."""

from __future__ import annotations

import numpy as np

from .. import crf
from ..attention import AttentionConfig, EncoderStack, positional_encoding
from ..corpus import DEFAULT_TOKEN_CAP, LabelVocab
from ..embeddings import random_table
from ..layers import Linear, cross_entropy
from ..numerics import Tensor
from .base import JointEstimator

CLS = "<cls>"


class JointTransformer(JointEstimator):
    kind = "joint-transformer"

    def __init__(self, d_model=64, heads=2, layers=2, d_ff=128, use_crf=False,
                 lr=0.00005, optimizer="adam", epochs=30, batch_size=32,
                 seed=42, token_cap=DEFAULT_TOKEN_CAP, patience=None):
        self.d_model = d_model
        self.heads = heads
        self.layers = layers
        self.d_ff = d_ff
        self.use_crf = use_crf
        self.lr = lr
        self.optimizer = optimizer
        self.epochs = epochs
        self.batch_size = batch_size
        self.seed = seed
        self.token_cap = token_cap
        self.patience = patience

    def _build(self, corpus, rng):
        self._build_from_vocabs({
            "tags": list(corpus.tag_vocab.labels),
            "intents": list(corpus.intent_vocab.labels),
            "words": corpus.word_list(),
        }, rng)

    def _build_from_vocabs(self, vocabs, rng):
        self.tag_vocab_ = LabelVocab(vocabs["tags"])
        self.intent_vocab_ = LabelVocab(vocabs["intents"])
        self.table_ = random_table([CLS] + list(vocabs["words"]), self.d_model,
                                   self.seed)
        config = AttentionConfig(d_model=self.d_model, heads=self.heads,
                                 layers=self.layers, d_ff=self.d_ff)
        self.encoder_ = EncoderStack("encoder", config, rng)
        self.intent_head_ = Linear("intent", self.d_model,
                                   len(self.intent_vocab_), rng)
        self.slot_head_ = Linear("slot", self.d_model, len(self.tag_vocab_), rng)
        if self.use_crf:
            self.transitions_ = crf.TransitionMatrix(len(self.tag_vocab_), rng=rng)
        self._vocabs = dict(vocabs)

    def _after_step(self):
        if self.use_crf:
            self.transitions_.fix_constraints()

    def _encode(self, tokens):
        tokens = tokens[: self.token_cap]
        X = self.table_.rows([CLS] + list(tokens))
        X = X + Tensor(positional_encoding(len(tokens) + 1, self.d_model))
        return self.encoder_(X), len(tokens)

    def forward(self, tokens):
        """(intent distribution, per-token slot distributions or CRF
        emission scores)."""
        H, n = self._encode(tokens)
        y_i = self.intent_head_(H[0]).softmax()
        slot_logits = self.slot_head_(H[1:n + 1])
        if self.use_crf:
            return y_i, slot_logits
        return y_i, slot_logits.softmax(axis=-1)

    def joint_log_prob(self, tokens, gold_tags, gold_intent):
        """log p(intent | x) + sum_n log p(slot_n | x) (softmax head)."""
        y_i, y_s = self.forward(tokens)
        if self.use_crf:
            raise ValueError("joint_log_prob is defined for the softmax head")
        lp = np.log(max(y_i.value[self.intent_vocab_[gold_intent]], 1e-300))
        for i, tag in enumerate(gold_tags):
            lp += np.log(max(y_s.value[i, self.tag_vocab_[tag]], 1e-300))
        return float(lp)

    def _loss(self, sentence, mode="train", rng=None):
        tokens = sentence.tokens[: self.token_cap]
        tags = sentence.tags[: self.token_cap]
        y_i, slots = self.forward(tokens)
        gold_intent = np.zeros(len(self.intent_vocab_))
        gold_intent[self.intent_vocab_[sentence.intent_key]] = 1.0
        intent_loss = cross_entropy(y_i, gold_intent)
        gold_ids = [self.tag_vocab_[t] for t in tags]
        if self.use_crf:
            slot_loss = crf.nll_loss(slots, self.transitions_.A, gold_ids)
        else:
            # mean over tokens keeps the slot term comparable to the intent term
            per_token = []
            for i, gid in enumerate(gold_ids):
                onehot = np.zeros(len(self.tag_vocab_))
                onehot[gid] = 1.0
                per_token.append(cross_entropy(slots[i], onehot))
            slot_loss = sum(per_token[1:], per_token[0]) / float(len(per_token))
        return intent_loss + slot_loss

    def _predict_one(self, tokens):
        tokens = tuple(tokens)[: self.token_cap]
        y_i, slots = self.forward(tokens)
        intent = self.intent_vocab_.label(int(np.argmax(y_i.value)))
        if self.use_crf:
            path, _ = crf.viterbi_decode(slots, self.transitions_.A)
        else:
            path = list(np.argmax(slots.value, axis=-1))
        return [self.tag_vocab_.label(int(i)) for i in path], intent

    def parameters(self):
        params = [self.table_.matrix] + self.encoder_.parameters() \
            + self.intent_head_.parameters() + self.slot_head_.parameters()
        if self.use_crf:
            params += self.transitions_.parameters()
        return params

    def _config_dict(self):
        return {"d_model": self.d_model, "heads": self.heads,
                "layers": self.layers, "d_ff": self.d_ff,
                "use_crf": self.use_crf, "lr": self.lr,
                "optimizer": self.optimizer, "epochs": self.epochs,
                "batch_size": self.batch_size, "seed": self.seed,
                "token_cap": self.token_cap}

    def _vocab_dict(self):
        return dict(self._vocabs)
