#!/usr/bin/env python3
"""Walkthrough: stochastic BPE segmentation via merge dropout.

The same word comes out differently from draw to draw; p interpolates between
deterministic BPE (p=0) and character splitting (p=1). Mean token counts grow
with p, which is what pushes short tokens into the training stream.

Run:  python demos/02_bpe_dropout.py
"""

import random
from collections import Counter

from subtok import ingest, word_counts
from subtok.bpe import encode, encode_dropout, train_bpe

TEXT = """\
stronger strongest strong strongly
longer longest long
slower slowest slow slowly
faster fastest fast
"""


def main() -> None:
    counts = word_counts(ingest(TEXT))
    model = train_bpe(counts, 40)
    word = "strongest"

    print(f"deterministic: {list(encode(model, word).tokens)}\n")
    rng = random.Random(5)
    print("ten dropout draws at p=0.3:")
    for i in range(10):
        print(f"  {i}: {list(encode_dropout(model, word, 0.3, rng).tokens)}")

    print("\nsegmentation diversity over 2000 draws of the same word:")
    for p in (0.0, 0.1, 0.3, 0.6, 1.0):
        rng = random.Random(5)
        seen = Counter(encode_dropout(model, word, p, rng).tokens for _ in range(2000))
        mean_len = sum(len(k) * v for k, v in seen.items()) / 2000
        print(f"  p={p:<4} distinct segmentations: {len(seen):3d}   mean tokens/word: {mean_len:.2f}")

    print("\np=0 reproduces the deterministic path; p=1 is characters:")
    rng = random.Random(1)
    assert encode_dropout(model, word, 0.0, rng).tokens == encode(model, word).tokens
    print(f"  p=1: {list(encode_dropout(model, word, 1.0, rng).tokens)}")


if __name__ == "__main__":
    main()
