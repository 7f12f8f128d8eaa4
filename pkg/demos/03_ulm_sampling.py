#!/usr/bin/env python3
"""Walkthrough: unigram-LM subword training and temperature sampling.

Trains a small piece inventory with EM + pruning, then contrasts Viterbi,
n-best and sampled segmentations. Sampling at temperature alpha draws a
segmentation x with probability proportional to P(x)^alpha: alpha=0 is
uniform, large alpha collapses onto the Viterbi path. With l=inf the draw is
taken over the whole lattice by forward filtering / backward sampling.

Run:  python demos/03_ulm_sampling.py
"""

import math
import random
from collections import Counter

from subtok import ingest, word_counts
from subtok.ulm import SamplingConfig, SegLattice, nbest, sample_segmentation, train_ulm, viterbi

TEXT = """\
unreadable unbearable unbeatable
readable bearable beatable
reading bearing beating
read bear beat
"""


def main() -> None:
    counts = word_counts(ingest(TEXT))
    trace: list[tuple[int, float]] = []
    model = train_ulm(counts, 24, max_piece_len=8, trace=trace)

    print("EM trace (vocab size, corpus log-likelihood):")
    for size, ll in trace:
        print(f"  {size:4d}  {ll:10.4f}")

    word = "unbearable"
    print(f"\nviterbi({word!r}) = {list(viterbi(model, word).tokens)}")
    print("top 5 segmentations:")
    for seq, lp in nbest(model, word, 5):
        print(f"  {math.exp(lp):.6f}  {list(seq.tokens)}")

    print("\n2000 lattice samples per temperature:")
    for alpha in (0.0, 0.5, 1.0, 5.0):
        rng = random.Random(12)
        config = SamplingConfig(alpha=alpha, l=math.inf)
        draws = Counter(
            tuple(sample_segmentation(model, word, config, rng).tokens) for _ in range(2000)
        )
        top, freq = draws.most_common(1)[0]
        print(f"  alpha={alpha:<4} distinct: {len(draws):3d}   mode ({freq / 2000:.2f}): {list(top)}")

    lattice = SegLattice.build(model, word, alpha=1.0)
    print(f"\ntotal probability mass of all segmentations of {word!r}: {math.exp(lattice.log_mass):.8f}")


if __name__ == "__main__":
    main()
