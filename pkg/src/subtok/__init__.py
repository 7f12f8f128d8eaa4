"""Subword tokenization toolkit.

Byte pair encoding with deterministic and dropout segmentation, unigram-LM
subword training with Viterbi / n-best / temperature-sampled segmentation,
reproducible per-epoch tokenization streams, WER/CER and OOV F-score
evaluation, and token distribution statistics.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .bpe import (
    BpeModel,
    MergeRule,
    encode,
    encode_dropout,
    load_bpe,
    save_bpe,
    train_bpe,
)
from .corpus import (
    Corpus,
    NormalizationConfig,
    Utterance,
    WordCounts,
    ingest,
    ingest_file,
    train_word_set,
    word_counts,
)
from .errors import (
    ConfigError,
    IngestError,
    ModelFormatError,
    PairingError,
    SubtokError,
    TrainingError,
    UnknownTokenError,
)
from .tokens import DEFAULT_EOW, TokenSeq, detokenize
from .ulm import (
    SamplingConfig,
    SegLattice,
    UnigramModel,
    load_ulm,
    nbest,
    sample_segmentation,
    save_ulm,
    seq_logprob,
    train_ulm,
    viterbi,
)


def load_model(path: str) -> BpeModel | UnigramModel:
    """Load a model file of either kind, dispatching on its version header."""
    from .bpe import BPE_FORMAT_VERSION, load_bpe
    from .ulm import ULM_FORMAT_VERSION, load_ulm

    with open(path, encoding="utf-8") as handle:
        header = handle.readline().rstrip("\n")
    if header.startswith(BPE_FORMAT_VERSION):
        return load_bpe(path)
    if header == ULM_FORMAT_VERSION:
        return load_ulm(path)
    raise ModelFormatError(f"{path}: unrecognized model header {header!r}")
