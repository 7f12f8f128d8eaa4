#!/usr/bin/env python3
"""Walkthrough: token distribution statistics over simulated epochs.

Compares deterministic BPE against BPE-dropout on the same corpus and model:
dropout raises the share of short tokens and widens the set of distinct words
each short token appears in (its context words). Emits the CSV reports and,
when matplotlib is importable, a rank/frequency plot.

Run:  python demos/06_token_statistics.py [outdir]
"""

import random
import sys

from subtok.augment import AugmentConfig, Mode
from subtok.corpus import ingest, word_counts
from subtok.bpe import train_bpe
from subtok.stats import short_token_share, simulate_epochs, token_length, write_reports

STEMS = ["tala", "miru", "kove", "sendi", "parla", "vento", "gira", "luma", "nokta", "riva"]
SUFFIXES = ["", "s", "ta", "no", "lin", "dor"]


def synth_corpus(n_tokens: int, seed: int) -> str:
    rng = random.Random(seed)
    lines = []
    produced = 0
    while produced < n_tokens:
        count = rng.randint(4, 9)
        words = [rng.choice(STEMS) + rng.choice(SUFFIXES) for _ in range(count)]
        lines.append(" ".join(words))
        produced += count
    return "".join(line + "\n" for line in lines)


def main() -> None:
    outdir = sys.argv[1] if len(sys.argv) > 1 else "stats_reports"
    corpus = ingest(synth_corpus(4000, seed=3))
    model = train_bpe(word_counts(corpus), 120)

    det = simulate_epochs(corpus, model, AugmentConfig(mode=Mode.DETERMINISTIC_BPE, seed=0), 10)
    drop = simulate_epochs(corpus, model, AugmentConfig(mode=Mode.BPE_DROPOUT, p=0.1, seed=0), 10)

    print("single-character occurrence share over 10 epochs:")
    print(f"  deterministic: {short_token_share(det, 1):6.2f}%")
    print(f"  dropout p=0.1: {short_token_share(drop, 1):6.2f}%")

    short = [t for t in det.token_counts if token_length(t) <= 2 and t in drop.token_counts]
    wider = sum(drop.unique_words(t) >= det.unique_words(t) for t in short)
    print(f"\nshort tokens with at least as many context words under dropout: {wider}/{len(short)}")
    sample = sorted(short, key=lambda t: -det.token_counts[t])[:8]
    print("  token   det-contexts  dropout-contexts")
    for token in sample:
        print(f"  {token:8s} {det.unique_words(token):6d} {drop.unique_words(token):12d}")

    written = write_reports(drop, outdir)
    print(f"\nCSV reports: {', '.join(written)}")

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib not available; skipping the plot")
        return
    fig, ax = plt.subplots(figsize=(6, 4))
    for stats, label in ((det, "deterministic"), (drop, "dropout p=0.1")):
        counts = sorted(stats.token_counts.values(), reverse=True)
        ax.plot(range(1, len(counts) + 1), counts, label=label)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("token rank")
    ax.set_ylabel("occurrences in 10 epochs")
    ax.legend()
    fig.tight_layout()
    fig.savefig(f"{outdir}/freq_rank.png", dpi=120)
    print(f"plot: {outdir}/freq_rank.png")


if __name__ == "__main__":
    main()
