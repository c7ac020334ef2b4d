"""Model families and checkpoint reconstruction."""

from __future__ import annotations

import numpy as np

from .. import checkpoint as ckpt
from .base import DivergenceError, JointEstimator, NotFittedError, as_corpus
from .co_interactive import CoInteractiveTagger
from .ner import BiLstmCrfTagger
from .svm import SvmIntentClassifier
from .transformer import JointTransformer
from .unified import UnifiedTagger

MODEL_KINDS = {
    BiLstmCrfTagger.kind: BiLstmCrfTagger,
    SvmIntentClassifier.kind: SvmIntentClassifier,
    UnifiedTagger.kind: UnifiedTagger,
    JointTransformer.kind: JointTransformer,
    CoInteractiveTagger.kind: CoInteractiveTagger,
}


def make_model(kind, **overrides):
    if kind not in MODEL_KINDS:
        raise ValueError(f"unknown model kind {kind!r}; choose from "
                         f"{sorted(MODEL_KINDS)}")
    return MODEL_KINDS[kind](**overrides)


def load_model(path):
    """Reconstruct a fitted estimator from a checkpoint directory."""
    kind, config, vocabs, arrays = ckpt.load(path)
    if kind not in MODEL_KINDS:
        raise ckpt.CheckpointError(f"unknown model kind {kind!r}")
    cls = MODEL_KINDS[kind]
    init = {k: v for k, v in config.items()
            if k in cls().get_params() and k != "embeddings"}
    model = cls(**init)
    rng = np.random.default_rng(model.seed)
    model._build_from_vocabs(vocabs, rng)
    if hasattr(model, "table_"):
        model.table_.trainable = bool(config.get("embeddings_trainable",
                                                 model.table_.trainable))
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
    after = getattr(model, "_after_step", None)
    if after:
        after()
    return model


__all__ = [
    "BiLstmCrfTagger", "SvmIntentClassifier", "UnifiedTagger",
    "JointTransformer", "CoInteractiveTagger", "MODEL_KINDS",
    "make_model", "load_model", "as_corpus",
    "DivergenceError", "NotFittedError", "JointEstimator",
]
