"""Token distribution statistics over simulated training epochs.

Counts token occurrences and the set of distinct source words each token
appears in across n independently seeded stochastic epochs, plus token-length
aggregations and the length profile of tokens inside correctly emitted OOV
words. Reports are columnar CSV files with a config fingerprint comment.
"""

from __future__ import annotations

import os
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import bpe as bpe_mod
from . import ulm as ulm_mod
from .augment import AugmentConfig, Model, iter_epoch_word_tokens
from .corpus import Corpus
from .errors import ConfigError
from .tokens import DEFAULT_EOW


def token_length(token: str, eow_mark: str = DEFAULT_EOW) -> int:
    """Character length excluding the end-of-word mark."""
    if token.endswith(eow_mark) and len(token) > len(eow_mark):
        return len(token) - len(eow_mark)
    return len(token)


@dataclass
class TokenStats:
    """Accumulated occurrence counts, per-token context words (sparse dict of
    sets, worst case |vocab| x |word types|), and length buckets."""

    token_counts: Counter[str] = field(default_factory=Counter)
    context_words: dict[str, set[str]] = field(default_factory=dict)
    length_counts: Counter[int] = field(default_factory=Counter)
    epochs: int = 0
    config_fingerprint: str = ""
    eow_mark: str = DEFAULT_EOW

    @property
    def total_occurrences(self) -> int:
        return sum(self.token_counts.values())

    def unique_words(self, token: str) -> int:
        return len(self.context_words.get(token, ()))

    def add(self, word: str, tokens: Iterable[str]) -> None:
        for token in tokens:
            self.token_counts[token] += 1
            self.context_words.setdefault(token, set()).add(word)
            self.length_counts[token_length(token, self.eow_mark)] += 1


def simulate_epochs(corpus: Corpus, model: Model, config: AugmentConfig, n_epochs: int) -> TokenStats:
    """Run epochs 1..n of the augmentation stream and accumulate statistics."""
    if n_epochs < 1:
        raise ConfigError(f"n_epochs must be >= 1, got {n_epochs}")
    eow = model.eow_mark if isinstance(model, bpe_mod.BpeModel) else DEFAULT_EOW
    stats = TokenStats(epochs=n_epochs, config_fingerprint=config.describe(), eow_mark=eow)
    for epoch in range(1, n_epochs + 1):
        for utt, word_seqs in iter_epoch_word_tokens(corpus, model, config, epoch):
            for word, seq in zip(utt.words, word_seqs):
                stats.add(word, seq.tokens)
    return stats


def short_token_share(stats: TokenStats, max_len: int) -> float:
    """Percentage of token occurrences whose length is <= max_len."""
    if max_len < 1:
        raise ConfigError(f"max_len must be >= 1, got {max_len}")
    total = stats.total_occurrences
    if total == 0:
        raise ConfigError("token statistics are empty; share is undefined")
    short = sum(count for length, count in stats.length_counts.items() if length <= max_len)
    return 100.0 * short / total


def length_histogram(stats: TokenStats) -> dict[int, int]:
    """Occurrence counts per token length, ascending by length."""
    return dict(sorted(stats.length_counts.items()))


@dataclass(frozen=True)
class OovLengthProfile:
    """Token-length distribution inside correctly emitted OOV words, using the
    deterministic segmentation of the scoring model."""

    length_counts: dict[int, int]
    total_tokens: int
    short_share: float  # share of lengths 1..3, percent

    @property
    def is_empty(self) -> bool:
        return self.total_tokens == 0


def oov_token_length_profile(
    model: Model,
    tp_words: Counter[str] | dict[str, int] | Iterable[str],
    *,
    short_max_len: int = 3,
) -> OovLengthProfile:
    """Re-encode each emitted OOV word deterministically and bucket lengths,
    weighting by emission multiplicity. An empty tp set yields an empty,
    flagged profile."""
    if not isinstance(tp_words, (Counter, dict)):
        tp_words = Counter(tp_words)
    eow = model.eow_mark if isinstance(model, bpe_mod.BpeModel) else DEFAULT_EOW
    lengths: Counter[int] = Counter()
    for word, count in tp_words.items():
        if isinstance(model, bpe_mod.BpeModel):
            seq = bpe_mod.encode(model, word)
        else:
            seq = ulm_mod.viterbi(model, word)
        for token in seq.tokens:
            lengths[token_length(token, eow)] += count
    total = sum(lengths.values())
    short = sum(c for length, c in lengths.items() if length <= short_max_len)
    share = 100.0 * short / total if total else 0.0
    return OovLengthProfile(
        length_counts=dict(sorted(lengths.items())), total_tokens=total, short_share=share
    )


# --- CSV reports ------------------------------------------------------------


def _write_csv(path: str, fingerprint: str, header: list[str], rows: Iterable[Iterable[object]]) -> None:
    from ._util import atomic_writer

    with atomic_writer(path) as handle:
        handle.write(f"# {fingerprint}\n")
        handle.write(",".join(header) + "\n")
        for row in rows:
            handle.write(",".join(str(v) for v in row) + "\n")


def write_reports(
    stats: TokenStats,
    outdir: str,
    oov_profile: OovLengthProfile | None = None,
) -> list[str]:
    """Emit freq_rank.csv, context_scatter.csv and length_hist.csv (plus
    oov_length.csv when a profile is given). Returns the written paths."""
    os.makedirs(outdir, exist_ok=True)
    fingerprint = f"config: {stats.config_fingerprint} epochs={stats.epochs}"
    written = []

    tokens = list(stats.token_counts)
    counts = np.array([stats.token_counts[t] for t in tokens], dtype=np.int64)
    order = np.argsort(-counts, kind="stable")

    path = os.path.join(outdir, "freq_rank.csv")
    _write_csv(
        path,
        fingerprint,
        ["rank", "token", "count"],
        ((rank + 1, tokens[i], int(counts[i])) for rank, i in enumerate(order)),
    )
    written.append(path)

    path = os.path.join(outdir, "context_scatter.csv")
    _write_csv(
        path,
        fingerprint,
        ["token", "length", "count", "unique_words"],
        (
            (t, token_length(t, stats.eow_mark), stats.token_counts[t], stats.unique_words(t))
            for t in tokens
        ),
    )
    written.append(path)

    path = os.path.join(outdir, "length_hist.csv")
    _write_csv(
        path,
        fingerprint,
        ["length", "count"],
        length_histogram(stats).items(),
    )
    written.append(path)

    if oov_profile is not None:
        path = os.path.join(outdir, "oov_length.csv")
        total = oov_profile.total_tokens or 1
        _write_csv(
            path,
            fingerprint,
            ["length", "count", "share_percent"],
            (
                (length, count, round(100.0 * count / total, 4))
                for length, count in oov_profile.length_counts.items()
            ),
        )
        written.append(path)
    return written
