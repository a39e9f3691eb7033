import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from wlda.corpus import BowDocument, Corpus, SyntheticSpec, Vocabulary, generate_synthetic


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture(scope="session")
def tiny_corpus():
    """Five short documents over a 6-word vocabulary."""
    docs = [
        BowDocument({0: 2, 1: 1}),
        BowDocument({1: 1, 2: 3}),
        BowDocument({3: 2}),
        BowDocument({0: 1, 4: 1, 5: 1}),
        BowDocument({2: 1, 5: 2}),
    ]
    return Corpus(docs, Vocabulary(list("abcdef")))


@pytest.fixture(scope="session")
def small_synthetic():
    """A scaled-down LDA-process corpus with ground truth (fast to train on)."""
    spec = SyntheticSpec(vocab_size=30, num_topics=3, num_docs=400, mean_doc_length=20.0, seed=7)
    return generate_synthetic(spec)
