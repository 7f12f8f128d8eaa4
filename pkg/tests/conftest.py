from __future__ import annotations

import pytest

from subtok.bpe import train_bpe
from subtok.corpus import WordCounts, ingest, word_counts
from subtok.ulm import train_ulm

import corpusgen

# The toy corpus whose greedy merge sequence was executed by hand; used by the
# trainer oracle tests and the acceptance suite.
TOY_COUNTS = {"low": 5, "lower": 2, "newest": 6, "widest": 3}
TOY_BASE_VOCAB_SIZE = 11  # d e i l n o s w + r</w> t</w> w</w>
TOY_MERGES = [("e", "s"), ("es", "t</w>"), ("l", "o"), ("e", "w")]


@pytest.fixture(scope="session")
def toy_counts() -> WordCounts:
    return WordCounts.from_counter(TOY_COUNTS)


@pytest.fixture(scope="session")
def toy_bpe(toy_counts):
    return train_bpe(toy_counts, TOY_BASE_VOCAB_SIZE + 4)


@pytest.fixture(scope="session")
def text_1k() -> str:
    return corpusgen.corpus_text(seed=11, n_tokens=1000)


@pytest.fixture(scope="session")
def text_10k() -> str:
    return corpusgen.corpus_text(seed=7, n_tokens=10000)


@pytest.fixture(scope="session")
def corpus_1k(text_1k):
    return ingest(text_1k)


@pytest.fixture(scope="session")
def corpus_10k(text_10k):
    return ingest(text_10k)


@pytest.fixture(scope="session")
def counts_1k(corpus_1k):
    return word_counts(corpus_1k)


@pytest.fixture(scope="session")
def counts_10k(corpus_10k):
    return word_counts(corpus_10k)


@pytest.fixture(scope="session")
def bpe_1k(counts_1k):
    return train_bpe(counts_1k, 300)


@pytest.fixture(scope="session")
def bpe_10k(counts_10k):
    """The fixed open-corpus model at vocabulary size 1000."""
    return train_bpe(counts_10k, 1000)


@pytest.fixture(scope="session")
def ulm_10k(counts_10k):
    return train_ulm(counts_10k, 400, max_seed_size=3000)


@pytest.fixture(scope="session")
def corpus_file_10k(tmp_path_factory, text_10k):
    path = tmp_path_factory.mktemp("data") / "corpus10k.txt"
    path.write_text(text_10k, encoding="utf-8")
    return str(path)


@pytest.fixture(scope="session")
def corpus_file_1k(tmp_path_factory, text_1k):
    path = tmp_path_factory.mktemp("data") / "corpus1k.txt"
    path.write_text(text_1k, encoding="utf-8")
    return str(path)
