#!/usr/bin/env python3
"""Walkthrough: ingest a corpus, train a BPE merge table, encode words.

Run:  python demos/01_bpe_basics.py
"""

from subtok import ingest, word_counts
from subtok.bpe import dump_vocab, encode, train_bpe
from subtok.tokens import detokenize

TEXT = """\
the miller saw the mill
the mill turned and turned
a miller works in a mill
turning mills need strong millers
"""


def main() -> None:
    corpus = ingest(TEXT)
    counts = word_counts(corpus)
    print(f"corpus: {len(corpus)} utterances, {counts.total()} tokens, {len(counts)} types")
    print(f"digest: {corpus.source_digest[:16]}...")

    n_chars = len({s for w in counts.words() for s in (list(w[:-1]) + [w[-1] + '</w>'])})
    model = train_bpe(counts, n_chars + 8)
    print(f"\nbase character vocabulary: {n_chars} symbols; learned {len(model.merges)} merges:")
    for rule in model.merges:
        print(f"  #{rule.priority}: {rule.left} + {rule.right} -> {rule.token}")

    print(f"\nvocabulary ({len(model.vocab)} tokens): {' '.join(dump_vocab(model))}")

    for word in ("miller", "mills", "turning", "unmillable"):
        seq = encode(model, word)
        flags = f"  (unknown characters at {seq.unknown_positions})" if seq.has_unknown else ""
        print(f"encode({word!r:14s}) = {list(seq.tokens)}{flags}")
        assert detokenize(seq) == word

    print("\nround-trip detokenize(encode(w)) == w holds for every corpus word:")
    assert all(detokenize(encode(model, w)) == w for w in counts.words())
    print("  ok")


if __name__ == "__main__":
    main()
