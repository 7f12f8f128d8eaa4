#!/usr/bin/env python3
"""Walkthrough: WER/CER and OOV recognition scoring.

A reference word missing from the training transcripts is out-of-vocabulary.
Scoring counts, per utterance and with multiplicity, how often OOV words were
emitted (tp) or missed (fn), and how often the hypothesis invented words seen
neither in training nor anywhere in the references (fp).

Run:  python demos/05_scoring.py
"""

from subtok import ingest, train_word_set
from subtok.metrics import edit_distance_report, fscore, oov_score, oov_set, pair_corpora

TRAIN = "we saw the river\nthe boat was slow\nwe saw the boat\n"
REF = "we saw the kingfisher\nthe kingfisher was quick\nthe river was slow\n"
HYP = "we saw the kingfisher\nthe king fisher was quick\nthe river was slow\n"


def main() -> None:
    train_words = train_word_set(ingest(TRAIN))
    ref = ingest(REF)
    hyp = ingest(HYP)
    pairs = pair_corpora(ref, hyp)

    oov = oov_set(train_words, ref)
    print(f"OOV reference words: {sorted(oov)}")

    wer = edit_distance_report(pairs, unit="word")
    cer = edit_distance_report(pairs, unit="character")
    print(f"\nWER {wer.wer:.2f}%  (S={wer.substitutions} I={wer.insertions} D={wer.deletions} N={wer.ref_tokens})")
    print(f"CER {cer.wer:.2f}%  (S={cer.substitutions} I={cer.insertions} D={cer.deletions} N={cer.ref_tokens})")

    report = oov_score(train_words, pairs)
    print(f"\nOOV: tp={report.tp} fp={report.fp} fn={report.fn}")
    print(f"precision={report.precision:.3f} recall={report.recall:.3f} fscore={report.fscore:.3f}")

    # the F-score arithmetic on its own
    print("\n2PR/(P+R) on some published operating points:")
    for p, r in ((0.156, 0.197), (0.067, 0.165), (0.199, 0.255)):
        print(f"  P={p:.3f} R={r:.3f} -> F={fscore(p, r):.3f}")


if __name__ == "__main__":
    main()
