"""Byte pair encoding: greedy merge-table training, deterministic encoding,
and stochastic encoding via merge dropout.

Words are split into characters with the end-of-word mark appended to the
final character; merges are learned over these symbols, weighted by word
frequency. Inference replays the merge table: a word is re-split into the same
initial symbols and the applicable merge with the lowest priority number is
applied repeatedly (leftmost occurrence first) until none applies. The dropout
variant suppresses each candidate merge occurrence independently with
probability p at every step, so the same word can come out segmented
differently from draw to draw while p = 0 reproduces the deterministic path
and p = 1 leaves single characters.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

from ._util import atomic_write_text
from .corpus import WordCounts
from .errors import ConfigError, ModelFormatError
from .tokens import DEFAULT_EOW, TokenSeq, detokenize

BPE_FORMAT_VERSION = "subtok-bpe v1"


@dataclass(frozen=True)
class MergeRule:
    left: str
    right: str
    priority: int

    @property
    def token(self) -> str:
        return self.left + self.right


@dataclass(frozen=True)
class BpeModel:
    """Ordered merge table plus the token vocabulary it produces.

    The vocabulary always contains every character observed in training (in
    plain and end-of-word-marked variants as observed) and one token per
    merge.
    """

    merges: tuple[MergeRule, ...]
    vocab: frozenset[str]
    eow_mark: str = DEFAULT_EOW

    @cached_property
    def ranks(self) -> dict[tuple[str, str], int]:
        return {(rule.left, rule.right): rule.priority for rule in self.merges}

    def __contains__(self, token: str) -> bool:
        return token in self.vocab


def word_symbols(word: str, eow_mark: str = DEFAULT_EOW) -> list[str]:
    """Initial symbols of a word: characters, with the end-of-word mark
    appended to the final one."""
    if not word:
        return []
    return list(word[:-1]) + [word[-1] + eow_mark]


def _check_word(word: str, eow_mark: str) -> None:
    if not word:
        raise ConfigError("cannot encode an empty word")
    if any(ch.isspace() for ch in word):
        raise ConfigError(f"word {word!r} contains whitespace")
    if eow_mark in word:
        raise ConfigError(f"word {word!r} contains the end-of-word mark {eow_mark!r}")


def train_bpe(
    word_counts: WordCounts,
    target_vocab_size: int,
    *,
    eow_mark: str = DEFAULT_EOW,
    min_pair_count: int = 2,
    merge_stats: list[tuple[tuple[str, str], int]] | None = None,
) -> BpeModel:
    """Learn a merge table greedily by highest pair frequency.

    Pair frequencies are weighted by word counts. Training stops when the
    vocabulary reaches `target_vocab_size` or no pair occurs at least
    `min_pair_count` times. Ties between equally frequent pairs break
    lexicographically on (left, right) so training is deterministic across
    platforms. `merge_stats`, when given, receives the (pair, frequency)
    selected at each step, for trainer self-consistency checks.
    """
    for word in word_counts.words():
        _check_word(word, eow_mark)

    words: list[tuple[list[str], int]] = [
        (word_symbols(word, eow_mark), count) for word, count in word_counts.items()
    ]
    base_vocab: set[str] = set()
    for symbols, _ in words:
        base_vocab.update(symbols)
    if target_vocab_size < len(base_vocab):
        raise ConfigError(
            f"target_vocab_size {target_vocab_size} is below the character vocabulary; "
            f"minimum is {len(base_vocab)}"
        )
    if min_pair_count < 1:
        raise ConfigError("min_pair_count must be >= 1")

    pair_counts: Counter[tuple[str, str]] = Counter()
    pair_words: dict[tuple[str, str], set[int]] = {}
    for index, (symbols, count) in enumerate(words):
        for pair in zip(symbols, symbols[1:]):
            pair_counts[pair] += count
            pair_words.setdefault(pair, set()).add(index)

    vocab = set(base_vocab)
    merges: list[MergeRule] = []
    while len(vocab) < target_vocab_size and pair_counts:
        pair, frequency = min(pair_counts.items(), key=lambda kv: (-kv[1], kv[0]))
        if frequency < min_pair_count:
            break
        if merge_stats is not None:
            merge_stats.append((pair, frequency))
        merged = pair[0] + pair[1]
        for index in sorted(pair_words.get(pair, ())):
            symbols, count = words[index]
            old_pairs = Counter(zip(symbols, symbols[1:]))
            new_symbols = _apply_merge(symbols, pair)
            new_pairs = Counter(zip(new_symbols, new_symbols[1:]))
            words[index] = (new_symbols, count)
            for changed in old_pairs.keys() | new_pairs.keys():
                delta = new_pairs.get(changed, 0) - old_pairs.get(changed, 0)
                if delta:
                    pair_counts[changed] += delta * count
                    if pair_counts[changed] <= 0:
                        del pair_counts[changed]
                if changed in new_pairs:
                    pair_words.setdefault(changed, set()).add(index)
                elif changed in pair_words:
                    pair_words[changed].discard(index)
        pair_words.pop(pair, None)
        pair_counts.pop(pair, None)
        merges.append(MergeRule(left=pair[0], right=pair[1], priority=len(merges)))
        vocab.add(merged)

    return BpeModel(merges=tuple(merges), vocab=frozenset(vocab), eow_mark=eow_mark)


def _apply_merge(symbols: list[str], pair: tuple[str, str]) -> list[str]:
    left, right = pair
    out: list[str] = []
    i = 0
    while i < len(symbols):
        if i + 1 < len(symbols) and symbols[i] == left and symbols[i + 1] == right:
            out.append(left + right)
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return out


def _finish(symbols: list[str], vocab: frozenset[str]) -> TokenSeq:
    unknown = tuple(i for i, token in enumerate(symbols) if token not in vocab)
    return TokenSeq(tokens=tuple(symbols), unknown_positions=unknown)


def encode(model: BpeModel, word: str) -> TokenSeq:
    """Deterministic BPE encoding of one word.

    Characters unseen in training stay as single-character tokens and are
    flagged via `unknown_positions`; they are not an error.
    """
    _check_word(word, model.eow_mark)
    ranks = model.ranks
    symbols = word_symbols(word, model.eow_mark)
    while True:
        best: tuple[int, int] | None = None
        for i in range(len(symbols) - 1):
            rank = ranks.get((symbols[i], symbols[i + 1]))
            if rank is not None and (best is None or rank < best[0]):
                best = (rank, i)
        if best is None:
            break
        _, i = best
        symbols = symbols[:i] + [symbols[i] + symbols[i + 1]] + symbols[i + 2 :]
    return _finish(symbols, model.vocab)


def encode_dropout(model: BpeModel, word: str, p: float, rng: random.Random) -> TokenSeq:
    """BPE encoding with merge dropout.

    At every step each candidate merge occurrence is suppressed independently
    with probability p (resampled at every step, one uniform draw per
    candidate in left-to-right position order). Among the survivors the usual
    lowest-priority / leftmost rule picks the merge to apply. A step with an
    empty candidate set - whether exhausted deterministically or fully
    suppressed - ends segmentation. Bit-reproducible for a fixed seed.
    """
    if not 0.0 <= p <= 1.0:
        raise ConfigError(f"dropout probability must be in [0, 1], got {p}")
    _check_word(word, model.eow_mark)
    ranks = model.ranks
    symbols = word_symbols(word, model.eow_mark)
    while True:
        candidates: list[tuple[int, int]] = []  # (position, rank), in position order
        for i in range(len(symbols) - 1):
            rank = ranks.get((symbols[i], symbols[i + 1]))
            if rank is not None:
                candidates.append((i, rank))
        if not candidates:
            break
        survivors = [(rank, i) for i, rank in candidates if rng.random() >= p]
        if not survivors:
            break
        _, i = min(survivors)
        symbols = symbols[:i] + [symbols[i] + symbols[i + 1]] + symbols[i + 2 :]
    return _finish(symbols, model.vocab)


def _is_base_token(token: str, eow_mark: str) -> bool:
    if len(token) == 1:
        return True
    return token.endswith(eow_mark) and len(token) == len(eow_mark) + 1


def dump_vocab(model: BpeModel) -> list[str]:
    """Canonical vocabulary order: plain characters sorted, end-of-word
    character variants sorted, merge products in priority order, then any
    remaining tokens sorted (trained models have none)."""
    plain = sorted(t for t in model.vocab if len(t) == 1)
    marked = sorted(
        t for t in model.vocab if len(t) == len(model.eow_mark) + 1 and t.endswith(model.eow_mark)
    )
    seen = set(plain) | set(marked)
    merged: list[str] = []
    for rule in model.merges:
        token = rule.token
        if token in model.vocab and token not in seen:
            merged.append(token)
            seen.add(token)
    rest = sorted(t for t in model.vocab if t not in seen)
    return plain + marked + merged + rest


def save_bpe(model: BpeModel, merges_path: str, vocab_path: str | None = None) -> None:
    """Write the merge table (version header, one "left right" per line in
    priority order) and the vocabulary file (one token per line)."""
    vocab_path = vocab_path or merges_path + ".vocab"
    header = f"{BPE_FORMAT_VERSION} eow={model.eow_mark}"
    lines = [header] + [f"{rule.left} {rule.right}" for rule in model.merges]
    atomic_write_text(merges_path, "".join(line + "\n" for line in lines))
    atomic_write_text(vocab_path, "".join(token + "\n" for token in dump_vocab(model)))


def load_bpe(merges_path: str, vocab_path: str | None = None) -> BpeModel:
    vocab_path = vocab_path or merges_path + ".vocab"
    with open(merges_path, encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    if not lines or not lines[0].startswith(BPE_FORMAT_VERSION):
        raise ModelFormatError(f"{merges_path}: not a {BPE_FORMAT_VERSION} merge table")
    eow_mark = DEFAULT_EOW
    for part in lines[0].split()[2:]:
        key, _, value = part.partition("=")
        if key == "eow":
            eow_mark = value
    merges = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(" ")
        if len(parts) != 2:
            raise ModelFormatError(f"{merges_path}:{lineno}: expected 'left right', got {line!r}")
        merges.append(MergeRule(left=parts[0], right=parts[1], priority=len(merges)))
    with open(vocab_path, encoding="utf-8") as handle:
        vocab = frozenset(line for line in handle.read().splitlines() if line)
    return BpeModel(merges=tuple(merges), vocab=vocab, eow_mark=eow_mark)


__all__ = [
    "BPE_FORMAT_VERSION",
    "BpeModel",
    "MergeRule",
    "detokenize",
    "dump_vocab",
    "encode",
    "encode_dropout",
    "load_bpe",
    "save_bpe",
    "train_bpe",
    "word_symbols",
]
