"""The unit flowing through every segmenter: one tokenization of one word."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

DEFAULT_EOW = "</w>"


@dataclass(frozen=True)
class TokenSeq:
    """One segmentation of one word.

    Concatenating the tokens and stripping boundary marks reproduces the
    source word exactly. `unknown_positions` flags tokens that fell back to
    single characters never seen in training; they survive verbatim at the
    string layer and map to the shared UNK id at the id layer.
    """

    tokens: tuple[str, ...]
    unknown_positions: tuple[int, ...] = ()

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self) -> Iterator[str]:
        return iter(self.tokens)

    def __getitem__(self, index: int) -> str:
        return self.tokens[index]

    @property
    def has_unknown(self) -> bool:
        return bool(self.unknown_positions)


def detokenize(tokens: TokenSeq | tuple[str, ...] | list[str], eow_mark: str = DEFAULT_EOW) -> str:
    """Concatenate tokens, turning end-of-word marks into word boundaries.

    Works for a single word's tokens or a whole utterance's concatenated
    token stream; boundaries collapse to single spaces.
    """
    if isinstance(tokens, TokenSeq):
        tokens = tokens.tokens
    return "".join(tokens).replace(eow_mark, " ").strip()
