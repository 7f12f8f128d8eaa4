"""Corpus ingestion: normalization, utterance/word splitting and counting.

Input is UTF-8 plain text, one utterance per line, optionally prefixed with
"id<TAB>" when id mode is on. Words are whatever unicode whitespace splitting
yields; no punctuation handling of any kind.
"""

from __future__ import annotations

import hashlib
import io
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator

from .errors import ConfigError, IngestError

NORMALIZATION_FORMS = ("NFC", "NFD", "NFKC", "NFKD", "none")
CASE_POLICIES = ("preserve", "lower", "casefold")
BLANK_POLICIES = ("keep", "drop")


@dataclass(frozen=True)
class NormalizationConfig:
    """How raw text becomes utterances.

    `max_chars` drops over-long lines before splitting; it exists for
    preparing training sets and is off by default because it breaks line
    alignment between paired ref/hyp files.
    """

    form: str = "NFC"
    case: str = "preserve"
    id_mode: bool = False
    blank_lines: str = "keep"
    max_chars: int | None = None

    def __post_init__(self) -> None:
        if self.form not in NORMALIZATION_FORMS:
            raise ConfigError(f"unknown normalization form {self.form!r}; choose from {NORMALIZATION_FORMS}")
        if self.case not in CASE_POLICIES:
            raise ConfigError(f"unknown case policy {self.case!r}; choose from {CASE_POLICIES}")
        if self.blank_lines not in BLANK_POLICIES:
            raise ConfigError(f"unknown blank-line policy {self.blank_lines!r}; choose from {BLANK_POLICIES}")
        if self.max_chars is not None and self.max_chars < 1:
            raise ConfigError("max_chars must be a positive integer or None")

    def apply(self, text: str) -> str:
        if self.form != "none":
            text = unicodedata.normalize(self.form, text)
        if self.case == "lower":
            text = text.lower()
        elif self.case == "casefold":
            text = text.casefold()
        return text


@dataclass(frozen=True)
class Utterance:
    id: str
    words: tuple[str, ...]

    def text(self) -> str:
        return " ".join(self.words)


@dataclass(frozen=True)
class Corpus:
    """An ordered sequence of utterances plus a digest of the canonical dump."""

    utterances: tuple[Utterance, ...]
    source_digest: str

    def __len__(self) -> int:
        return len(self.utterances)

    def __iter__(self) -> Iterator[Utterance]:
        return iter(self.utterances)

    def words(self) -> Iterator[str]:
        for utt in self.utterances:
            yield from utt.words

    def dump(self, id_mode: bool = False) -> str:
        """Canonical text form: one utterance per line, words joined by single
        spaces, trailing newline when non-empty. Mirrors the input format."""
        lines = []
        for utt in self.utterances:
            text = utt.text()
            lines.append(f"{utt.id}\t{text}" if id_mode else text)
        return "".join(line + "\n" for line in lines)


def _digest(dump: str) -> str:
    return hashlib.sha256(dump.encode("utf-8")).hexdigest()


def _decode(data: bytes) -> str:
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise IngestError(f"invalid UTF-8 at byte offset {exc.start}", byte_offset=exc.start) from exc


def ingest(source: str | bytes | IO[str] | IO[bytes], config: NormalizationConfig | None = None) -> Corpus:
    """Build a Corpus from text. One utterance per input line; normalization is
    applied before whitespace splitting. Accepts str, bytes or a file object.
    """
    config = config or NormalizationConfig()
    if isinstance(source, (io.IOBase, io.TextIOBase)) or hasattr(source, "read"):
        source = source.read()  # type: ignore[union-attr]
    if isinstance(source, bytes):
        source = _decode(source)

    utterances: list[Utterance] = []
    for lineno, line in enumerate(source.splitlines()):
        if config.id_mode:
            utt_id, sep, rest = line.partition("\t")
            if not sep or not utt_id:
                raise IngestError(f"line {lineno + 1}: expected 'id<TAB>text'")
        else:
            utt_id, rest = str(len(utterances)), line
        rest = config.apply(rest)
        if config.max_chars is not None and len(rest) > config.max_chars:
            continue
        words = tuple(rest.split())
        if not words and config.blank_lines == "drop":
            continue
        utterances.append(Utterance(id=utt_id, words=words))

    corpus = Corpus(utterances=tuple(utterances), source_digest="")
    return Corpus(utterances=corpus.utterances, source_digest=_digest(corpus.dump(config.id_mode)))


def ingest_file(path: str, config: NormalizationConfig | None = None) -> Corpus:
    with open(path, "rb") as handle:
        return ingest(handle.read(), config)


@dataclass(frozen=True)
class WordCounts:
    """Word-type frequencies. Iteration order is deterministic: descending
    count, ties broken lexicographically."""

    entries: dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for word, count in self.entries.items():
            if count < 1:
                raise ConfigError(f"count for {word!r} must be >= 1, got {count}")

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, word: str) -> bool:
        return word in self.entries

    def __getitem__(self, word: str) -> int:
        return self.entries[word]

    def items(self) -> Iterator[tuple[str, int]]:
        return iter(self.entries.items())

    def words(self) -> Iterator[str]:
        return iter(self.entries)

    def total(self) -> int:
        return sum(self.entries.values())

    @classmethod
    def from_counter(cls, counter: Counter[str] | dict[str, int]) -> "WordCounts":
        ordered = dict(sorted(counter.items(), key=lambda kv: (-kv[1], kv[0])))
        return cls(entries=ordered)


def word_counts(corpus: Corpus | Iterable[str]) -> WordCounts:
    """Count word tokens over a corpus (or any iterable of words)."""
    counter: Counter[str] = Counter()
    if isinstance(corpus, Corpus):
        counter.update(corpus.words())
    else:
        counter.update(corpus)
    return WordCounts.from_counter(counter)


def train_word_set(corpus: Corpus) -> frozenset[str]:
    """Distinct word types of a training corpus; the complement of this set
    over some evaluation reference defines its out-of-vocabulary words."""
    return frozenset(corpus.words())
