import pytest

import jointnlu
from jointnlu.corpus import parse_corpus


@pytest.fixture(scope="session")
def toy_corpus():
    return parse_corpus(str(jointnlu.toy_corpus_path()))
