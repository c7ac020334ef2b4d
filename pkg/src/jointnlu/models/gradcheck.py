"""Finite-difference verification of every model family's backward pass on
tiny deterministic instances."""

from __future__ import annotations

import numpy as np

from ..corpus import Corpus, TaggedSentence
from ..numerics import finite_diff_check
from . import make_model

TINY_OVERRIDES = {
    "bilstm-crf": dict(hidden=3, embedding_dim=3),
    "unified": dict(hidden=3, embedding_dim=3),
    "svm": dict(embedding_dim=4),
    "joint-transformer": dict(d_model=8, heads=2, layers=1, d_ff=8),
    "co-interactive": dict(hidden=3, embedding_dim=3),
}


def tiny_corpus():
    sents = [
        TaggedSentence(("book", "to", "paris"), ("O", "O", "B-city"),
                       frozenset(["travel"])),
        TaggedSentence(("play", "some", "jazz", "now"),
                       ("O", "O", "B-genre", "I-genre"), frozenset(["music"])),
        TaggedSentence(("call", "ana"), ("O", "B-name"), frozenset(["phone"])),
    ]
    return Corpus(sentences=sents).rebuild_vocabs()


def gradcheck_model(kind, seed=0, step=1e-4, tolerance=1e-4):
    """Build a tiny instance of the model kind and compare analytic gradients
    of its training loss against central differences."""
    corpus = tiny_corpus()
    overrides = dict(TINY_OVERRIDES[kind])
    overrides["seed"] = seed
    model = make_model(kind, **overrides)
    rng = np.random.default_rng(seed)
    if kind == "svm":
        model._build_from_vocabs({
            "intents": list(corpus.intent_vocab.labels),
            "words": corpus.word_list(),
        })
        # move off the zero init so hinge kinks are not sitting on the data
        r = np.random.default_rng(seed + 1)
        model.W.value[...] = r.normal(scale=0.3, size=model.W.value.shape)
        model.b.value[...] = r.normal(scale=0.3, size=model.b.value.shape)
        feats = np.stack([model.features(s.tokens) for s in corpus.sentences])
        labels = np.array([model.intent_vocab_[s.intent_key]
                           for s in corpus.sentences])
        loss_fn = lambda: model.objective(feats, labels)
    else:
        model._build(corpus, rng)

        def loss_fn():
            total = None
            for sent in corpus.sentences:
                term = model._loss(sent, mode="eval", rng=None)
                total = term if total is None else total + term
            return total

    return finite_diff_check(loss_fn, model.parameters(), step=step,
                             tolerance=tolerance)
