"""Transcript scoring: word/character error rates and OOV recognition.

WER/CER come from a unit-cost Levenshtein alignment. The error decomposition
is made canonical by a fixed backtrace priority (match, substitution,
deletion, insertion), so substitution/insertion/deletion counts are
well-defined even when several minimal alignments exist.

OOV scoring counts, with multiplicity and per utterance: how often reference
words unseen in training were emitted (tp) or missed (fn), and how often the
hypothesis produced words seen neither in training nor anywhere in the
evaluation references (fp).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .corpus import Corpus
from .errors import ConfigError, PairingError


@dataclass(frozen=True)
class EvalPair:
    id: str
    ref: tuple[str, ...]
    hyp: tuple[str, ...]


def pair_corpora(ref: Corpus, hyp: Corpus, by_id: bool = False) -> list[EvalPair]:
    """Pair reference and hypothesis utterances by line order, or by id."""
    if by_id:
        hyp_by_id = {utt.id: utt for utt in hyp}
        pairs = []
        for lineno, utt in enumerate(ref, start=1):
            match = hyp_by_id.get(utt.id)
            if match is None:
                raise PairingError(
                    f"line {lineno}: reference id {utt.id!r} has no hypothesis", line_number=lineno
                )
            pairs.append(EvalPair(id=utt.id, ref=utt.words, hyp=match.words))
        return pairs
    if len(ref) != len(hyp):
        lineno = min(len(ref), len(hyp)) + 1
        raise PairingError(
            f"line {lineno}: reference has {len(ref)} utterances but hypothesis has {len(hyp)}",
            line_number=lineno,
        )
    return [
        EvalPair(id=r.id, ref=r.words, hyp=h.words) for r, h in zip(ref, hyp)
    ]


@dataclass(frozen=True)
class WerReport:
    substitutions: int
    insertions: int
    deletions: int
    ref_tokens: int

    @property
    def errors(self) -> int:
        return self.substitutions + self.insertions + self.deletions

    @property
    def wer(self) -> float:
        """(S+I+D)/N as a percentage; may exceed 100."""
        if self.ref_tokens == 0:
            return 0.0 if self.errors == 0 else float("inf")
        return 100.0 * self.errors / self.ref_tokens

    def as_dict(self, prefix: str = "wer") -> dict[str, float | int]:
        return {
            f"{prefix}_percent": round(self.wer, 2),
            "substitutions": self.substitutions,
            "insertions": self.insertions,
            "deletions": self.deletions,
            "ref_tokens": self.ref_tokens,
        }


def _align_counts(ref: Sequence[str], hyp: Sequence[str]) -> tuple[int, int, int]:
    """Levenshtein alignment with unit costs; returns (S, I, D) under the
    canonical match > substitution > deletion > insertion backtrace."""
    m, n = len(ref), len(hyp)
    dist = np.zeros((m + 1, n + 1), dtype=np.int32)
    dist[:, 0] = np.arange(m + 1)
    dist[0, :] = np.arange(n + 1)
    hyp_arr = np.array(hyp, dtype=object) if n else np.empty(0, dtype=object)
    positions = np.arange(n + 1)
    for i in range(1, m + 1):
        sub_cost = (hyp_arr != ref[i - 1]).astype(np.int32) if n else np.empty(0, dtype=np.int32)
        upper = np.minimum(dist[i - 1, :-1] + sub_cost, dist[i - 1, 1:] + 1)
        full = np.empty(n + 1, dtype=np.int32)
        full[0] = i
        full[1:] = upper
        # fold in the left-neighbor (insertion) dependency with a prefix min
        dist[i] = np.minimum.accumulate(full - positions) + positions
    subs = ins = dels = 0
    i, j = m, n
    while i > 0 or j > 0:
        if i > 0 and j > 0 and ref[i - 1] == hyp[j - 1] and dist[i, j] == dist[i - 1, j - 1]:
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and dist[i, j] == dist[i - 1, j - 1] + 1:
            subs += 1
            i, j = i - 1, j - 1
        elif i > 0 and dist[i, j] == dist[i - 1, j] + 1:
            dels += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    return subs, ins, dels


def edit_distance_report(pairs: Iterable[EvalPair], unit: str = "word") -> WerReport:
    """Accumulate S/I/D over all pairs. Character mode joins each side's words
    with single spaces and aligns the character sequences."""
    if unit not in ("word", "character"):
        raise ConfigError(f"unit must be 'word' or 'character', got {unit!r}")
    total_s = total_i = total_d = total_n = 0
    for pair in pairs:
        if unit == "word":
            ref: Sequence[str] = pair.ref
            hyp: Sequence[str] = pair.hyp
        else:
            ref = list(" ".join(pair.ref))
            hyp = list(" ".join(pair.hyp))
        s, i, d = _align_counts(ref, hyp)
        total_s += s
        total_i += i
        total_d += d
        total_n += len(ref)
    return WerReport(
        substitutions=total_s, insertions=total_i, deletions=total_d, ref_tokens=total_n
    )


def oov_set(train_words: frozenset[str] | set[str], references: Corpus | Iterable[Sequence[str]]) -> frozenset[str]:
    """Distinct reference words absent from the training vocabulary."""
    words: set[str] = set()
    utterances = references.utterances if isinstance(references, Corpus) else references
    for utt in utterances:
        utt_words = utt.words if hasattr(utt, "words") else utt
        words.update(utt_words)
    return frozenset(words - set(train_words))


def fscore(precision: float, recall: float) -> float:
    """2PR/(P+R), defined as 0 when the denominator is 0."""
    if precision + recall == 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class OovReport:
    tp: int
    fp: int
    fn: int

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp > 0 else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn > 0 else 0.0

    @property
    def fscore(self) -> float:
        return fscore(self.precision, self.recall)

    def as_dict(self) -> dict[str, float | int]:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "precision": self.precision,
            "recall": self.recall,
            "fscore": self.fscore,
        }


def _ref_vocabulary(pairs: Sequence[EvalPair]) -> frozenset[str]:
    return frozenset(word for pair in pairs for word in pair.ref)


def oov_score(
    train_words: frozenset[str] | set[str],
    pairs: Sequence[EvalPair],
    *,
    per_utterance_fp: bool = False,
) -> OovReport:
    """OOV recognition counts over paired utterances.

    tp and fn are counted per utterance with multiplicity: an OOV reference
    word occurring k times scores min(k, occurrences in the same utterance's
    hypothesis) true positives and the shortfall as false negatives. fp counts
    hypothesis words (with multiplicity) seen neither in training nor in the
    evaluation reference vocabulary; that vocabulary is global to the
    evaluation set unless `per_utterance_fp` narrows it to each utterance.
    """
    train = set(train_words)
    global_ref_vocab = _ref_vocabulary(pairs)
    tp = fp = fn = 0
    for pair in pairs:
        ref_counts = Counter(pair.ref)
        hyp_counts = Counter(pair.hyp)
        for word, count in ref_counts.items():
            if word in train:
                continue
            emitted = min(count, hyp_counts.get(word, 0))
            tp += emitted
            fn += count - emitted
        known = set(pair.ref) if per_utterance_fp else global_ref_vocab
        for word, count in hyp_counts.items():
            if word not in train and word not in known:
                fp += count
    return OovReport(tp=tp, fp=fp, fn=fn)


def oov_true_positive_words(
    train_words: frozenset[str] | set[str], pairs: Sequence[EvalPair]
) -> Counter[str]:
    """Multiset of OOV reference words actually emitted, for downstream token
    length profiling of correctly recognized OOV words."""
    train = set(train_words)
    emitted: Counter[str] = Counter()
    for pair in pairs:
        ref_counts = Counter(pair.ref)
        hyp_counts = Counter(pair.hyp)
        for word, count in ref_counts.items():
            if word in train:
                continue
            hits = min(count, hyp_counts.get(word, 0))
            if hits:
                emitted[word] += hits
    return emitted
