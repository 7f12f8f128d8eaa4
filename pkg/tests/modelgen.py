"""Random small unigram models for segmentation tests."""

from __future__ import annotations

import math
import random

from subtok.ulm import UnigramModel


def model_from_probs(probs: dict[str, float]) -> UnigramModel:
    total = sum(probs.values())
    pieces = {p: math.log(v / total) for p, v in probs.items()}
    required = frozenset(p for p in probs if len(p) == 1)
    return UnigramModel(pieces=pieces, required_chars=required)


def random_model(rng: random.Random, word: str, extra_pieces: int = 6) -> UnigramModel:
    """All single characters of the word plus a random batch of its substrings,
    with random probabilities."""
    substrings = {word[i:j] for i in range(len(word)) for j in range(i + 2, len(word) + 1)}
    chosen = set(word)
    chosen.update(rng.sample(sorted(substrings), min(extra_pieces, len(substrings))))
    return model_from_probs({p: 0.05 + rng.random() for p in chosen})
