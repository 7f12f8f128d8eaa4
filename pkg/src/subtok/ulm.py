"""Unigram language model subword segmentation.

A model maps each piece to a log-probability; a segmentation's log-probability
is the sum over its pieces. Training seeds candidates from substring
statistics, runs EM over the segmentation lattice of every word, and
alternates EM with pruning of the lowest-loss pieces until the vocabulary
reaches its target size.

Segmentation comes in three flavours: Viterbi (most probable path), n-best
(top paths in order) and temperature sampling. Sampling over a finite
candidate list draws from the tempered multinomial over the n-best; sampling
over the full lattice uses forward filtering / backward sampling with the
temperature applied to piece log-probs inside the forward pass, which is
equivalent to tempering whole-path probabilities because a path's mass is a
product of its pieces'.

All lattice arithmetic is in log space with log-sum-exp; underflow here is a
bug, not a tolerance.
"""

from __future__ import annotations

import math
import random
from bisect import bisect_right
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from functools import cached_property

from ._util import atomic_write_text, log_sum_exp
from .corpus import WordCounts
from .errors import ConfigError, ModelFormatError, UnknownTokenError
from .tokens import TokenSeq

ULM_FORMAT_VERSION = "subtok-ulm v1"


@dataclass(frozen=True)
class UnigramModel:
    """Piece log-probabilities plus the single characters that are never
    pruned. Piece probabilities sum to 1 (within 1e-6)."""

    pieces: dict[str, float]
    required_chars: frozenset[str]

    @cached_property
    def max_piece_len(self) -> int:
        return max((len(p) for p in self.pieces), default=0)

    def __contains__(self, piece: str) -> bool:
        return piece in self.pieces

    def logprob(self, piece: str) -> float:
        try:
            return self.pieces[piece]
        except KeyError:
            raise UnknownTokenError(piece) from None


@dataclass(frozen=True)
class SamplingConfig:
    """Temperature alpha and candidate-set size l (math.inf = whole lattice)."""

    alpha: float = 1.0
    l: int | float = math.inf

    def __post_init__(self) -> None:
        if self.alpha < 0:
            raise ConfigError(f"alpha must be >= 0, got {self.alpha}")
        if self.l != math.inf and (not isinstance(self.l, int) or self.l < 1):
            raise ConfigError(f"l must be a positive integer or math.inf, got {self.l!r}")


def substring_counts(word_counts: WordCounts, max_piece_len: int) -> Counter[str]:
    """Occurrence counts of every substring up to max_piece_len, overlapping
    occurrences included, weighted by word frequency."""
    counts: Counter[str] = Counter()
    for word, count in word_counts.items():
        n = len(word)
        for i in range(n):
            for j in range(i + 1, min(i + max_piece_len, n) + 1):
                counts[word[i : j]] += count
    return counts


def seed_candidates(
    word_counts: WordCounts,
    max_piece_len: int = 16,
    max_seed_size: int | None = None,
) -> dict[str, float]:
    """Initial piece probabilities, proportional to count x length scores.

    All substrings of corpus words up to max_piece_len are ranked by score and
    truncated to max_seed_size; single characters are always kept regardless
    of the cap.
    """
    if max_piece_len < 1:
        raise ConfigError(f"max_piece_len must be >= 1, got {max_piece_len}")
    counts = substring_counts(word_counts, max_piece_len)
    scores = {piece: count * len(piece) for piece, count in counts.items()}
    chars = [p for p in scores if len(p) == 1]
    longer = sorted((p for p in scores if len(p) > 1), key=lambda p: (-scores[p], p))
    if max_seed_size is not None:
        longer = longer[: max(0, max_seed_size - len(chars))]
    kept = sorted(chars) + longer
    total = sum(scores[p] for p in kept)
    return {p: scores[p] / total for p in kept}


def _candidate_ends(pieces: dict[str, float], max_len: int, word: str) -> list[list[tuple[int, str, float]]]:
    """For each end position j (1..n), the (start, piece, logprob) of every
    vocabulary piece spelling word[start:j]."""
    n = len(word)
    ends: list[list[tuple[int, str, float]]] = [[] for _ in range(n + 1)]
    for i in range(n):
        for j in range(i + 1, min(i + max_len, n) + 1):
            lp = pieces.get(word[i:j])
            if lp is not None:
                ends[j].append((i, word[i:j], lp))
    return ends


def _char_fallback(pieces: dict[str, float], word: str) -> TokenSeq:
    tokens = tuple(word)
    unknown = tuple(i for i, ch in enumerate(tokens) if ch not in pieces)
    return TokenSeq(tokens=tokens, unknown_positions=unknown)


def _segmentable(pieces: dict[str, float], word: str) -> bool:
    return all(ch in pieces for ch in word)


def viterbi(model: UnigramModel, word: str) -> TokenSeq:
    """Most probable segmentation.

    Ties break toward fewer tokens, then lexicographically (equivalently:
    earliest split points first). A word containing characters outside the
    model falls back to per-character tokens with the unknown ones flagged.
    """
    return nbest(model, word, 1)[0][0]


def _viterbi(pieces: dict[str, float], max_len: int, word: str, banned: str | None = None) -> TokenSeq:
    n = len(word)
    if n == 0:
        return TokenSeq(tokens=())
    if not _segmentable(pieces, word):
        return _char_fallback(pieces, word)

    def lookup(piece: str) -> float | None:
        if piece == banned:
            return None
        return pieces.get(piece)

    # Suffix DP on (-logprob, token count); reconstruction from the left picks
    # the earliest boundary achieving the optimum, which is exactly the
    # fewest-tokens-then-lexicographic tie rule.
    best: list[tuple[float, int] | None] = [None] * (n + 1)
    best[n] = (0.0, 0)
    for i in range(n - 1, -1, -1):
        top: tuple[float, int] | None = None
        for j in range(i + 1, min(i + max_len, n) + 1):
            lp = lookup(word[i:j])
            if lp is None or best[j] is None:
                continue
            key = (best[j][0] - lp, best[j][1] + 1)
            if top is None or key < top:
                top = key
        best[i] = top
    tokens: list[str] = []
    i = 0
    while i < n:
        target = best[i]
        assert target is not None
        for j in range(i + 1, min(i + max_len, n) + 1):
            lp = lookup(word[i:j])
            if lp is None or best[j] is None:
                continue
            if (best[j][0] - lp, best[j][1] + 1) == target:
                tokens.append(word[i:j])
                i = j
                break
        else:  # pragma: no cover - unreachable if the DP is consistent
            raise AssertionError("viterbi reconstruction failed")
    return TokenSeq(tokens=tuple(tokens))


def nbest(model: UnigramModel, word: str, n: int) -> list[tuple[TokenSeq, float]]:
    """Top-n distinct segmentations with log-probabilities, best first.

    Ordering matches viterbi's tie rule, so the first element always equals
    the Viterbi segmentation. Returns fewer entries when fewer segmentations
    exist; an unsegmentable word yields its per-character fallback at -inf.
    """
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    pieces = model.pieces
    length = len(word)
    if length == 0:
        return [(TokenSeq(tokens=()), 0.0)]
    if not _segmentable(pieces, word):
        return [(_char_fallback(pieces, word), -math.inf)]
    # Prefix n-best lists under the total order
    # (-logprob, token count, boundary positions); boundaries identify a
    # segmentation uniquely, so common extension preserves order and the DP is
    # exact. Log-probs accumulate left to right, so exactly tied paths (e.g.
    # the same piece multiset in a different order) compare equal bit-for-bit
    # and fall through to the tie keys.
    empty: list[tuple[float, int, tuple[int, ...], tuple[str, ...]]] = [(0.0, 0, (), ())]
    table: list[list[tuple[float, int, tuple[int, ...], tuple[str, ...]]]] = [empty] * (length + 1)
    max_len = model.max_piece_len
    for j in range(1, length + 1):
        acc: list[tuple[float, int, tuple[int, ...], tuple[str, ...]]] = []
        for i in range(max(0, j - max_len), j):
            lp = pieces.get(word[i:j])
            if lp is None:
                continue
            piece = word[i:j]
            for neglog, ntok, bounds, toks in table[i]:
                acc.append((neglog - lp, ntok + 1, bounds + (j,), toks + (piece,)))
        acc.sort()
        table[j] = acc[:n]
    return [(TokenSeq(tokens=toks), -neglog) for neglog, _, _, toks in table[length]]


@dataclass(frozen=True)
class SegLattice:
    """Forward-filtered segmentation lattice of one word.

    `ends[j]` holds (start, piece, tempered log-weight) for every piece ending
    at position j; `log_forward[j]` is the log of the total tempered mass of
    all partial segmentations covering word[:j]. Sampling walks backward from
    the end, picking each piece proportionally to its share of the incoming
    mass, which draws full segmentations exactly proportionally to
    P(segmentation)^alpha.
    """

    word: str
    alpha: float
    ends: tuple[tuple[tuple[int, str, float], ...], ...]
    log_forward: tuple[float, ...]
    _cumulative: tuple[tuple[float, ...], ...] = field(repr=False)

    @classmethod
    def build(cls, model: UnigramModel, word: str, alpha: float = 1.0) -> "SegLattice":
        if alpha < 0:
            raise ConfigError(f"alpha must be >= 0, got {alpha}")
        ends = _candidate_ends(model.pieces, model.max_piece_len, word)
        n = len(word)
        log_forward: list[float] = [-math.inf] * (n + 1)
        log_forward[0] = 0.0
        weighted: list[list[tuple[int, str, float]]] = [[] for _ in range(n + 1)]
        for j in range(1, n + 1):
            arrivals = []
            for i, piece, lp in ends[j]:
                w = alpha * lp
                weighted[j].append((i, piece, w))
                if log_forward[i] != -math.inf:
                    arrivals.append(w + log_forward[i])
            log_forward[j] = log_sum_exp(arrivals)
        cumulative: list[tuple[float, ...]] = [()] * (n + 1)
        for j in range(1, n + 1):
            if log_forward[j] == -math.inf:
                continue
            acc = 0.0
            cum = []
            for i, _, w in weighted[j]:
                if log_forward[i] != -math.inf:
                    acc += math.exp(w + log_forward[i] - log_forward[j])
                cum.append(acc)
            if cum:
                cum[-1] = max(cum[-1], 1.0)  # guard the last bucket against rounding
            cumulative[j] = tuple(cum)
        return cls(
            word=word,
            alpha=alpha,
            ends=tuple(tuple(e) for e in weighted),
            log_forward=tuple(log_forward),
            _cumulative=tuple(cumulative),
        )

    @property
    def log_mass(self) -> float:
        """Log of the total tempered path mass; with alpha = 1 this is the log
        of the summed probability of all segmentations."""
        return self.log_forward[-1]

    def sample(self, rng: random.Random) -> TokenSeq:
        """One backward-sampling draw; consumes one uniform per chosen piece."""
        if self.log_mass == -math.inf:
            raise ConfigError(f"word {self.word!r} has no segmentation under this model")
        tokens: list[str] = []
        j = len(self.word)
        while j > 0:
            cum = self._cumulative[j]
            idx = bisect_right(cum, rng.random())
            idx = min(idx, len(cum) - 1)
            start, piece, _ = self.ends[j][idx]
            tokens.append(piece)
            j = start
        tokens.reverse()
        return TokenSeq(tokens=tuple(tokens))


def sample_segmentation(
    model: UnigramModel,
    word: str,
    config: SamplingConfig,
    rng: random.Random,
) -> TokenSeq:
    """Draw one segmentation from the tempered distribution.

    Finite l: multinomial over the l-best list with weights P(x)^alpha.
    l = inf: exact lattice sampling over all segmentations. alpha = 0 is the
    uniform distribution over the candidate set in both cases.
    """
    if not _segmentable(model.pieces, word):
        return _char_fallback(model.pieces, word)
    if len(word) == 0:
        return TokenSeq(tokens=())
    if config.l == math.inf:
        return SegLattice.build(model, word, config.alpha).sample(rng)
    entries = nbest(model, word, int(config.l))
    weights = [config.alpha * lp for _, lp in entries]
    peak = max(weights)
    probs = [math.exp(w - peak) for w in weights]
    total = sum(probs)
    threshold = rng.random() * total
    acc = 0.0
    for (seq, _), prob in zip(entries, probs):
        acc += prob
        if threshold < acc:
            return seq
    return entries[-1][0]


def seq_logprob(model: UnigramModel, token_seq: TokenSeq | tuple[str, ...] | list[str]) -> float:
    """Sum of piece log-probs; the empty sequence scores 0 (empty product)."""
    if isinstance(token_seq, TokenSeq):
        token_seq = token_seq.tokens
    return sum(model.logprob(token) for token in token_seq)


# --- training -------------------------------------------------------------


def _expected_counts(
    pieces: dict[str, float],
    max_len: int,
    word_counts: WordCounts,
) -> tuple[dict[str, float], float]:
    """E-step: posterior expected piece counts over every word's lattice and
    the corpus log-likelihood under the current model."""
    expected: dict[str, float] = defaultdict(float)
    log_likelihood = 0.0
    for word, count in word_counts.items():
        n = len(word)
        ends = _candidate_ends(pieces, max_len, word)
        log_fw = [-math.inf] * (n + 1)
        log_fw[0] = 0.0
        for j in range(1, n + 1):
            log_fw[j] = log_sum_exp(
                [lp + log_fw[i] for i, _, lp in ends[j] if log_fw[i] != -math.inf]
            )
        log_z = log_fw[n]
        if log_z == -math.inf:
            raise ConfigError(f"word {word!r} is not segmentable with the current pieces")
        log_bw = [-math.inf] * (n + 1)
        log_bw[n] = 0.0
        starts: list[list[tuple[int, str, float]]] = [[] for _ in range(n + 1)]
        for j in range(1, n + 1):
            for i, piece, lp in ends[j]:
                starts[i].append((j, piece, lp))
        for i in range(n - 1, -1, -1):
            log_bw[i] = log_sum_exp(
                [lp + log_bw[j] for j, _, lp in starts[i] if log_bw[j] != -math.inf]
            )
        for j in range(1, n + 1):
            for i, piece, lp in ends[j]:
                if log_fw[i] == -math.inf or log_bw[j] == -math.inf:
                    continue
                expected[piece] += count * math.exp(log_fw[i] + lp + log_bw[j] - log_z)
        log_likelihood += count * log_z
    return dict(expected), log_likelihood


def corpus_log_likelihood(model: UnigramModel, word_counts: WordCounts) -> float:
    """Sum over words of count x log(total segmentation probability)."""
    _, ll = _expected_counts(model.pieces, model.max_piece_len, word_counts)
    return ll


def _prune(
    pieces: dict[str, float],
    expected: dict[str, float],
    required: frozenset[str],
    keep_n: int,
    max_len: int,
) -> dict[str, float]:
    """Drop the pieces whose removal costs the least likelihood.

    The loss of removing a piece redistributes its expected count onto the
    Viterbi segmentation of its own string by the remaining pieces. Required
    single characters are never dropped, which also guarantees every training
    word keeps at least its all-characters segmentation.
    """
    total = sum(expected.values())
    losses: list[tuple[float, str]] = []
    for piece in pieces:
        if piece in required or len(piece) == 1:
            continue
        count = expected.get(piece, 0.0)
        if count == 0.0:
            losses.append((0.0, piece))
            continue
        alt = _viterbi(pieces, max_len, piece, banned=piece).tokens
        log_p = math.log(count) - math.log(total)
        alt_total = total + count * (len(alt) - 1)
        log_alt = sum(
            math.log(expected.get(p, 0.0) + count) - math.log(alt_total) for p in alt
        )
        losses.append((count * (log_p - log_alt), piece))
    losses.sort(key=lambda item: (item[0], item[1]))
    n_drop = len(pieces) - keep_n
    dropped = {piece for _, piece in losses[:n_drop]}
    kept = {p: lp for p, lp in pieces.items() if p not in dropped}
    norm = log_sum_exp(list(kept.values()))
    return {p: lp - norm for p, lp in kept.items()}


def train_ulm(
    word_counts: WordCounts,
    target_vocab_size: int,
    *,
    shrink_factor: float = 0.75,
    em_subiters: int = 2,
    max_piece_len: int = 16,
    max_seed_size: int | None = None,
    trace: list[tuple[int, float]] | None = None,
) -> UnigramModel:
    """EM + prune training loop.

    Each round runs `em_subiters` EM passes and prunes to shrink_factor times
    the current size (never below the target, never dropping required
    characters); a final EM pass follows once the target size is reached.
    `trace`, when given, receives one (vocab size, corpus log-likelihood)
    entry per EM pass; the likelihood is evaluated on the model entering the
    pass and is non-decreasing between prunes.
    """
    if not 0.0 < shrink_factor < 1.0:
        raise ConfigError(f"shrink_factor must be in (0, 1), got {shrink_factor}")
    if em_subiters < 1:
        raise ConfigError(f"em_subiters must be >= 1, got {em_subiters}")
    required = frozenset(ch for word in word_counts.words() for ch in word)
    if target_vocab_size < len(required):
        raise ConfigError(
            f"target_vocab_size {target_vocab_size} is below the required character count "
            f"{len(required)}"
        )
    probs = seed_candidates(word_counts, max_piece_len, max_seed_size)
    if len(probs) < target_vocab_size:
        raise ConfigError(
            f"target_vocab_size {target_vocab_size} exceeds the {len(probs)} seed candidates; "
            "raise max_seed_size or max_piece_len"
        )
    pieces = {p: math.log(prob) for p, prob in probs.items()}

    def em_pass() -> dict[str, float]:
        nonlocal pieces
        expected, log_likelihood = _expected_counts(pieces, max_piece_len, word_counts)
        if trace is not None:
            trace.append((len(pieces), log_likelihood))
        log_total = math.log(sum(expected.values()))
        updated = {}
        for piece in pieces:
            count = expected.get(piece, 0.0)
            if count > 0.0:
                updated[piece] = math.log(count) - log_total
            elif piece in required:
                updated[piece] = pieces[piece]  # unreachable char path; keep as-is
        pieces = updated
        return expected

    while True:
        expected = {}
        for _ in range(em_subiters):
            expected = em_pass()
        if len(pieces) <= target_vocab_size:
            break
        keep_n = max(target_vocab_size, int(len(pieces) * shrink_factor))
        pieces = _prune(pieces, expected, required, keep_n, max_piece_len)
    em_pass()
    return UnigramModel(pieces=dict(pieces), required_chars=required)


# --- serialization ---------------------------------------------------------


def dump_pieces(model: UnigramModel) -> list[tuple[str, float]]:
    """Canonical dump order: descending probability, ties lexicographic."""
    return sorted(model.pieces.items(), key=lambda kv: (-kv[1], kv[0]))


def save_ulm(model: UnigramModel, path: str) -> None:
    lines = [ULM_FORMAT_VERSION]
    lines += [f"{piece}\t{lp:.17g}" for piece, lp in dump_pieces(model)]
    atomic_write_text(path, "".join(line + "\n" for line in lines))


def load_ulm(path: str) -> UnigramModel:
    with open(path, encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    if not lines or lines[0] != ULM_FORMAT_VERSION:
        raise ModelFormatError(f"{path}: not a {ULM_FORMAT_VERSION} vocabulary file")
    pieces: dict[str, float] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        piece, sep, value = line.partition("\t")
        if not sep or not piece:
            raise ModelFormatError(f"{path}:{lineno}: expected 'piece<TAB>logprob', got {line!r}")
        pieces[piece] = float(value)
    total = sum(math.exp(lp) for lp in pieces.values())
    if pieces and abs(total - 1.0) > 1e-4:
        raise ModelFormatError(f"{path}: piece probabilities sum to {total}, expected 1")
    required = frozenset(p for p in pieces if len(p) == 1)
    return UnigramModel(pieces=pieces, required_chars=required)


__all__ = [
    "SamplingConfig",
    "SegLattice",
    "ULM_FORMAT_VERSION",
    "UnigramModel",
    "corpus_log_likelihood",
    "dump_pieces",
    "load_ulm",
    "nbest",
    "sample_segmentation",
    "save_ulm",
    "seed_candidates",
    "seq_logprob",
    "substring_counts",
    "train_ulm",
    "viterbi",
]
