"""Co-interactive joint model: a shared Bi-LSTM encoder, label attention over
entity and intent label embeddings, a mirrored cross-attention layer between
the two streams, then per-token slot and mean-pooled intent heads."""

from __future__ import annotations

import numpy as np

from .. import crf
from ..attention import CoInteractiveLayer, label_attention
from ..corpus import LabelVocab
from ..embeddings import EmbeddingTable, random_table
from ..layers import Linear, cross_entropy, glorot
from ..numerics import Parameter, Tensor
from .base import JointEstimator
from .encoder import BiLstmEncoder, WordRepresenter


class CoInteractiveTagger(JointEstimator):
    kind = "co-interactive"

    def __init__(self, hidden=32, embeddings=None, embedding_dim=50,
                 use_crf=True, lr=0.001, optimizer="adam", epochs=30,
                 batch_size=32, seed=42, patience=None):
        self.hidden = hidden
        self.embeddings = embeddings
        self.embedding_dim = embedding_dim
        self.use_crf = use_crf
        self.lr = lr
        self.optimizer = optimizer
        self.epochs = epochs
        self.batch_size = batch_size
        self.seed = seed
        self.patience = patience

    def _build(self, corpus, rng):
        words = list(self.embeddings.index) \
            if isinstance(self.embeddings, EmbeddingTable) else corpus.word_list()
        self._build_from_vocabs({
            "tags": list(corpus.tag_vocab.labels),
            "intents": list(corpus.intent_vocab.labels),
            "words": words,
        }, rng)

    def _build_from_vocabs(self, vocabs, rng):
        self.tag_vocab_ = LabelVocab(vocabs["tags"])
        self.intent_vocab_ = LabelVocab(vocabs["intents"])
        if isinstance(self.embeddings, EmbeddingTable):
            self.table_ = self.embeddings
        else:
            self.table_ = random_table(vocabs["words"], self.embedding_dim,
                                       self.seed)
        self.repr_ = WordRepresenter(self.table_)
        self.encoder_ = BiLstmEncoder("encoder", self.repr_.dim, self.hidden, rng)
        d = self.encoder_.out_dim
        k, m = len(self.tag_vocab_), len(self.intent_vocab_)
        self.W_S = Parameter("labels.entity", glorot(rng, d, k, shape=(d, k)))
        self.W_I = Parameter("labels.intent", glorot(rng, d, m, shape=(d, m)))
        self.co_ = CoInteractiveLayer("co", d, rng)
        self.slot_head_ = Linear("slot", d, k, rng)
        self.intent_head_ = Linear("intent", d, m, rng)
        if self.use_crf:
            self.transitions_ = crf.TransitionMatrix(k, rng=rng)
        self._vocabs = dict(vocabs)

    def _after_step(self):
        if self.use_crf:
            self.transitions_.fix_constraints()

    def forward(self, tokens):
        """(per-token slot scores or distributions, intent distribution)."""
        vecs = self.repr_(tokens)
        states, _ = self.encoder_(vecs)
        H = Tensor.stack(states)
        H_S = label_attention(H, self.W_S)
        H_I = label_attention(H, self.W_I)
        H_S2, H_I2 = self.co_(H_S, H_I)
        slot_logits = self.slot_head_(H_S2)
        y_i = self.intent_head_(H_I2.mean(axis=0)).softmax()
        if self.use_crf:
            return slot_logits, y_i
        return slot_logits.softmax(axis=-1), y_i

    def _loss(self, sentence, mode="train", rng=None):
        slots, y_i = self.forward(sentence.tokens)
        gold_intent = np.zeros(len(self.intent_vocab_))
        gold_intent[self.intent_vocab_[sentence.intent_key]] = 1.0
        intent_loss = cross_entropy(y_i, gold_intent)
        gold_ids = [self.tag_vocab_[t] for t in sentence.tags]
        if self.use_crf:
            slot_loss = crf.nll_loss(slots, self.transitions_.A, gold_ids)
        else:
            per_token = []
            for i, gid in enumerate(gold_ids):
                onehot = np.zeros(len(self.tag_vocab_))
                onehot[gid] = 1.0
                per_token.append(cross_entropy(slots[i], onehot))
            slot_loss = sum(per_token[1:], per_token[0]) / float(len(per_token))
        return intent_loss + slot_loss

    def _predict_one(self, tokens):
        slots, y_i = self.forward(tokens)
        intent = self.intent_vocab_.label(int(np.argmax(y_i.value)))
        if self.use_crf:
            path, _ = crf.viterbi_decode(slots, self.transitions_.A)
        else:
            path = list(np.argmax(slots.value, axis=-1))
        return [self.tag_vocab_.label(int(i)) for i in path], intent

    def parameters(self):
        params = (self.repr_.parameters() + self.encoder_.parameters()
                  + [self.W_S, self.W_I] + self.co_.parameters()
                  + self.slot_head_.parameters() + self.intent_head_.parameters())
        if self.use_crf:
            params += self.transitions_.parameters()
        return params

    def all_parameters(self):
        params = list(self.parameters())
        if not self.table_.trainable:
            params.append(self.table_.matrix)
        return params

    def _config_dict(self):
        return {"hidden": self.hidden, "embedding_dim": self.table_.dim,
                "use_crf": self.use_crf, "lr": self.lr,
                "optimizer": self.optimizer, "epochs": self.epochs,
                "batch_size": self.batch_size, "seed": self.seed,
                "embeddings_trainable": self.table_.trainable}

    def _vocab_dict(self):
        return dict(self._vocabs)
