"""Joint named-entity recognition (slot filling) and intent classification:
BiLSTM-CRF taggers, an SVM intent classifier, and joint recurrent and
transformer models, with exact CRF inference and gradient-checked training."""

from importlib import resources

from .models import (BiLstmCrfTagger, CoInteractiveTagger, JointTransformer,
                     SvmIntentClassifier, UnifiedTagger, load_model, make_model)

__version__ = "0.1.0"


def toy_corpus_path():
    """Path of the bundled 32-sentence synthetic slot/intent corpus."""
    return resources.files("jointnlu").joinpath("data", "toy32.iob")


__all__ = [
    "BiLstmCrfTagger", "SvmIntentClassifier", "UnifiedTagger",
    "JointTransformer", "CoInteractiveTagger", "load_model", "make_model",
    "toy_corpus_path", "__version__",
]
