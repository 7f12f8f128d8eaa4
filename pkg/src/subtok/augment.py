"""Per-epoch stochastic tokenization of a corpus, with token-id mapping.

Every utterance gets its own generator derived from (seed, epoch, ordinal),
so a stream's content does not depend on consumption order or thread count,
and any epoch can be regenerated in isolation. Deterministic modes ignore the
generator entirely.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator

from . import bpe as bpe_mod
from . import ulm as ulm_mod
from ._util import atomic_writer, derive_rng
from .corpus import Corpus, Utterance
from .errors import ConfigError
from .tokens import TokenSeq


class Mode(str, Enum):
    DETERMINISTIC_BPE = "deterministic-bpe"
    BPE_DROPOUT = "bpe-dropout"
    ULM_VITERBI = "ulm-viterbi"
    ULM_SAMPLE = "ulm-sample"


BPE_MODES = (Mode.DETERMINISTIC_BPE, Mode.BPE_DROPOUT)
ULM_MODES = (Mode.ULM_VITERBI, Mode.ULM_SAMPLE)
STOCHASTIC_MODES = (Mode.BPE_DROPOUT, Mode.ULM_SAMPLE)


@dataclass(frozen=True)
class AugmentConfig:
    """Segmentation mode plus exactly the parameters that mode needs."""

    mode: Mode
    p: float | None = None
    sampling: ulm_mod.SamplingConfig | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        mode = Mode(self.mode)
        object.__setattr__(self, "mode", mode)
        if mode is Mode.BPE_DROPOUT:
            if self.p is None:
                raise ConfigError("bpe-dropout requires a dropout probability p")
            if not 0.0 <= self.p <= 1.0:
                raise ConfigError(f"dropout probability must be in [0, 1], got {self.p}")
        elif self.p is not None:
            raise ConfigError(f"mode {mode.value} does not take a dropout probability")
        if mode is Mode.ULM_SAMPLE:
            if self.sampling is None:
                raise ConfigError("ulm-sample requires a SamplingConfig")
        elif self.sampling is not None:
            raise ConfigError(f"mode {mode.value} does not take a SamplingConfig")
        if not -(2**63) <= self.seed < 2**63:
            raise ConfigError("seed must fit in a signed 64-bit integer")

    def describe(self) -> str:
        parts = [f"mode={self.mode.value}", f"seed={self.seed}"]
        if self.p is not None:
            parts.append(f"p={self.p}")
        if self.sampling is not None:
            l_text = "inf" if self.sampling.l == math.inf else str(self.sampling.l)
            parts.append(f"alpha={self.sampling.alpha}")
            parts.append(f"l={l_text}")
        return " ".join(parts)


Model = bpe_mod.BpeModel | ulm_mod.UnigramModel

PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"
BOS_TOKEN = "<s>"
EOS_TOKEN = "</s>"
WORD_SEP_TOKEN = "<w>"
RESERVED_TOKENS = (PAD_TOKEN, UNK_TOKEN, BOS_TOKEN, EOS_TOKEN, WORD_SEP_TOKEN)


@dataclass(frozen=True)
class VocabIndex:
    """Dense bijection between token strings and integer ids, reserved ids
    first. The word separator id delimits words in streams produced by ULM
    modes, whose tokens carry no end-of-word mark of their own."""

    id_to_token: tuple[str, ...]
    token_to_id: dict[str, int]

    @property
    def pad_id(self) -> int:
        return 0

    @property
    def unk_id(self) -> int:
        return 1

    @property
    def bos_id(self) -> int:
        return 2

    @property
    def eos_id(self) -> int:
        return 3

    @property
    def word_sep_id(self) -> int:
        return 4

    def __len__(self) -> int:
        return len(self.id_to_token)

    def id_for(self, token: str) -> int:
        return self.token_to_id.get(token, self.unk_id)

    def token_for(self, token_id: int) -> str:
        return self.id_to_token[token_id]


def build_index(model: Model) -> VocabIndex:
    """Deterministic id assignment: reserved ids first, then the model's
    vocabulary in canonical dump order."""
    if isinstance(model, bpe_mod.BpeModel):
        ordered = bpe_mod.dump_vocab(model)
    else:
        ordered = [piece for piece, _ in ulm_mod.dump_pieces(model)]
    for token in ordered:
        if token in RESERVED_TOKENS:
            raise ConfigError(f"vocabulary token {token!r} collides with a reserved token")
    id_to_token = RESERVED_TOKENS + tuple(ordered)
    return VocabIndex(
        id_to_token=id_to_token,
        token_to_id={token: i for i, token in enumerate(id_to_token)},
    )


def check_model_mode(model: Model, mode: Mode) -> None:
    from .errors import ModelFormatError

    if mode in BPE_MODES and not isinstance(model, bpe_mod.BpeModel):
        raise ModelFormatError(f"mode {mode.value} requires a BPE model")
    if mode in ULM_MODES and not isinstance(model, ulm_mod.UnigramModel):
        raise ModelFormatError(f"mode {mode.value} requires a unigram model")


def segment_word(model: Model, word: str, config: AugmentConfig, rng: random.Random) -> TokenSeq:
    mode = config.mode
    if mode is Mode.DETERMINISTIC_BPE:
        return bpe_mod.encode(model, word)
    if mode is Mode.BPE_DROPOUT:
        return bpe_mod.encode_dropout(model, word, config.p, rng)
    if mode is Mode.ULM_VITERBI:
        return ulm_mod.viterbi(model, word)
    return ulm_mod.sample_segmentation(model, word, config.sampling, rng)


def iter_epoch_word_tokens(
    corpus: Corpus,
    model: Model,
    config: AugmentConfig,
    epoch: int,
) -> Iterator[tuple[Utterance, list[TokenSeq]]]:
    """One epoch's segmentations, word by word.

    Words inside an utterance consume the utterance generator sequentially;
    utterances are independent of each other, so any sub-range of the corpus
    can be produced without generating the rest.
    """
    check_model_mode(model, config.mode)
    for ordinal, utt in enumerate(corpus):
        rng = derive_rng(config.seed, epoch, ordinal)
        yield utt, [segment_word(model, word, config, rng) for word in utt.words]


def utterance_ids(index: VocabIndex, word_seqs: list[TokenSeq], mode: Mode) -> list[int]:
    """Flatten one utterance's word tokenizations to ids. ULM modes insert the
    word separator id between words; BPE end-of-word marks already carry the
    boundaries. Unknown-character tokens map to the UNK id."""
    ids: list[int] = []
    separate = mode in ULM_MODES
    for w, seq in enumerate(word_seqs):
        if separate and w > 0:
            ids.append(index.word_sep_id)
        for pos, token in enumerate(seq.tokens):
            if pos in seq.unknown_positions:
                ids.append(index.unk_id)
            else:
                ids.append(index.id_for(token))
    return ids


def epoch_stream(
    corpus: Corpus,
    model: Model,
    index: VocabIndex,
    config: AugmentConfig,
    epoch: int,
) -> Iterator[tuple[str, list[int]]]:
    """Ordered (utterance id, token-id sequence) pairs for one epoch.

    Pull-based: O(1) utterances in flight. For a fixed (seed, epoch) the
    stream is byte-identical across runs and thread counts.
    """
    for utt, word_seqs in iter_epoch_word_tokens(corpus, model, config, epoch):
        yield utt.id, utterance_ids(index, word_seqs, config.mode)


def detokenize_ids(index: VocabIndex, ids: Iterable[int], eow_mark: str = bpe_mod.DEFAULT_EOW) -> str:
    """Reconstruct utterance text from a stream id sequence (UNK-free input)."""
    words: list[str] = []
    current: list[str] = []
    for token_id in ids:
        token = index.token_for(token_id)
        if token == WORD_SEP_TOKEN:
            words.append("".join(current))
            current = []
        elif token.endswith(eow_mark) and token not in RESERVED_TOKENS:
            current.append(token[: -len(eow_mark)])
            words.append("".join(current))
            current = []
        else:
            current.append(token)
    if current:
        words.append("".join(current))
    return " ".join(w for w in words if w)


def format_stream_line(utt_id: str, ids: list[int]) -> str:
    return f"{utt_id}\t{' '.join(str(i) for i in ids)}"


def write_stream(path: str, stream: Iterable[tuple[str, list[int]]]) -> None:
    """Materialize a stream: one "id<TAB>space-separated token ids" per line."""
    with atomic_writer(path) as handle:
        for utt_id, ids in stream:
            handle.write(format_stream_line(utt_id, ids) + "\n")


def write_token_stream(path: str, stream: Iterable[tuple[str, list[str]]]) -> None:
    """Human-readable sibling format: token strings instead of ids."""
    with atomic_writer(path) as handle:
        for utt_id, tokens in stream:
            handle.write(f"{utt_id}\t{' '.join(tokens)}\n")


def utterance_tokens(word_seqs: list[TokenSeq], mode: Mode) -> list[str]:
    """Token-string variant of `utterance_ids` (UNK substitution included)."""
    tokens: list[str] = []
    separate = mode in ULM_MODES
    for w, seq in enumerate(word_seqs):
        if separate and w > 0:
            tokens.append(WORD_SEP_TOKEN)
        for pos, token in enumerate(seq.tokens):
            tokens.append(UNK_TOKEN if pos in seq.unknown_positions else token)
    return tokens
