#!/usr/bin/env python3
"""Walkthrough: reproducible per-epoch stochastic tokenization streams.

Each utterance's generator is derived from (seed, epoch, ordinal), so a
stream is a pure function of its configuration: re-running an epoch gives the
same bytes, different epochs re-segment the same text differently, and
downstream consumers can shard utterances freely.

Run:  python demos/04_epoch_streams.py
"""

import tempfile

from subtok import ingest, word_counts
from subtok.augment import AugmentConfig, Mode, build_index, detokenize_ids, epoch_stream, write_stream
from subtok.bpe import train_bpe

TEXT = """\
the quick brown fox jumps over the lazy dog
pack my box with five dozen liquor jugs
how vexingly quick daft zebras jump
"""


def main() -> None:
    corpus = ingest(TEXT)
    model = train_bpe(word_counts(corpus), 60, min_pair_count=1)
    index = build_index(model)
    config = AugmentConfig(mode=Mode.BPE_DROPOUT, p=0.4, seed=7)
    print(f"index size: {len(index)} (5 reserved ids + vocabulary)")

    for epoch in (1, 2):
        print(f"\nepoch {epoch}:")
        for utt_id, ids in epoch_stream(corpus, model, index, config, epoch):
            tokens = " ".join(index.token_for(i) for i in ids)
            print(f"  {utt_id}: {tokens}")
            assert detokenize_ids(index, ids) == corpus.utterances[int(utt_id)].text()

    again = list(epoch_stream(corpus, model, index, config, epoch=1))
    first = list(epoch_stream(corpus, model, index, config, epoch=1))
    print(f"\nepoch 1 re-run identical: {again == first}")

    with tempfile.NamedTemporaryFile(suffix=".ids", delete=False) as handle:
        path = handle.name
    write_stream(path, epoch_stream(corpus, model, index, config, epoch=1))
    print(f"materialized epoch 1 to {path}:")
    with open(path, encoding="utf-8") as stream_file:
        print("  " + stream_file.readline().strip())


if __name__ == "__main__":
    main()
