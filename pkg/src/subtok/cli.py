"""Command-line interface: train / encode / sample / stream / score / stats.

Exit codes: 0 success, 1 I/O or input-decoding error, 2 configuration error
(including unknown flags), 3 model mismatch, unknown token, pairing failure or
infeasible training. Output files are written to a temporary sibling and
renamed into place, so a failed run never leaves a partial file.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, Iterator

from . import __version__, load_model
from . import augment as augment_mod
from . import bpe as bpe_mod
from . import metrics as metrics_mod
from . import stats as stats_mod
from . import ulm as ulm_mod
from ._util import atomic_writer
from .corpus import NormalizationConfig, ingest_file, train_word_set, word_counts
from .errors import (
    ConfigError,
    IngestError,
    ModelFormatError,
    PairingError,
    SubtokError,
    TrainingError,
    UnknownTokenError,
)

THREADS_ENV = "SUBTOK_THREADS"


def _default_threads() -> int:
    value = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(value))
    except ValueError:
        return 1


def _parse_l(text: str) -> int | float:
    if text.lower() in ("inf", "infinity"):
        return math.inf
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"l must be a positive integer or 'inf', got {text!r}")


def _add_norm_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--norm-form", default="NFC", choices=("NFC", "NFD", "NFKC", "NFKD", "none"),
                        help="unicode normalization form applied before splitting (default NFC)")
    parser.add_argument("--case", default="preserve", choices=("preserve", "lower", "casefold"),
                        help="case policy (default preserve)")
    parser.add_argument("--id-mode", action="store_true",
                        help="treat input lines as 'id<TAB>text'")
    parser.add_argument("--blank-lines", default="keep", choices=("keep", "drop"),
                        help="keep blank lines as empty utterances or drop them (default keep)")
    parser.add_argument("--max-chars", type=int, default=None,
                        help="drop utterances longer than this many characters (default: off)")


def _norm_config(args: argparse.Namespace) -> NormalizationConfig:
    return NormalizationConfig(
        form=args.norm_form,
        case=args.case,
        id_mode=args.id_mode,
        blank_lines=args.blank_lines,
        max_chars=args.max_chars,
    )


def _write_lines(path: str | None, lines: Iterable[str]) -> None:
    if path is None:
        for line in lines:
            sys.stdout.write(line + "\n")
        return
    with atomic_writer(path) as handle:
        for line in lines:
            handle.write(line + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subtok",
        description="Subword tokenization toolkit: BPE / BPE-dropout / unigram-LM "
        "segmentation, reproducible epoch streams, WER and OOV scoring.",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("train", help="train a BPE or unigram model on a corpus")
    p.add_argument("kind", choices=("bpe", "ulm"), help="model family to train")
    p.add_argument("--input", required=True, help="training corpus, one utterance per line")
    p.add_argument("--vocab-size", required=True, type=int, help="target vocabulary size")
    p.add_argument("--output", required=True, help="model file to write")
    p.add_argument("--eow-mark", default=bpe_mod.DEFAULT_EOW, help="end-of-word mark (BPE)")
    p.add_argument("--min-pair-count", type=int, default=2,
                   help="BPE: stop when no pair occurs this often (default 2)")
    p.add_argument("--shrink-factor", type=float, default=0.75,
                   help="ULM: per-round vocabulary shrink factor (default 0.75)")
    p.add_argument("--em-subiters", type=int, default=2,
                   help="ULM: EM passes per pruning round (default 2)")
    p.add_argument("--max-piece-len", type=int, default=16,
                   help="ULM: maximum piece length (default 16)")
    p.add_argument("--max-seed-size", type=int, default=None,
                   help="ULM: cap on seed candidates (default: unlimited)")
    _add_norm_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("encode", help="tokenize a corpus (deterministic, or BPE-dropout with -p)")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", default=None, help="output file (default: stdout)")
    p.add_argument("--dropout", "-p", type=float, default=None,
                   help="BPE-dropout probability; omit for deterministic encoding")
    p.add_argument("--seed", type=int, default=0, help="stream seed (default 0)")
    p.add_argument("--format", default="tokens", choices=("tokens", "ids", "both"),
                   help="emit token strings, token ids, or both (default tokens)")
    _add_norm_flags(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("sample", help="sample unigram-LM segmentations (temperature alpha)")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", default=None)
    p.add_argument("--alpha", type=float, default=0.1, help="temperature (default 0.1)")
    p.add_argument("--l", type=_parse_l, default=math.inf,
                   help="candidate-set size, or 'inf' for full-lattice sampling (default inf)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", default="tokens", choices=("tokens", "ids", "both"))
    _add_norm_flags(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("stream", help="materialize one training epoch as token-id lines")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--mode", required=True, choices=[m.value for m in augment_mod.Mode])
    p.add_argument("--epoch", required=True, type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dropout", "-p", type=float, default=None,
                   help="bpe-dropout probability (default 0.1 for that mode)")
    p.add_argument("--alpha", type=float, default=None,
                   help="ulm-sample temperature (default 0.1 for that mode)")
    p.add_argument("--l", type=_parse_l, default=None,
                   help="ulm-sample candidate-set size (default inf)")
    p.add_argument("--output", required=True)
    p.add_argument("--tokens", action="store_true",
                   help="also write a sibling .tokens file with token strings")
    p.add_argument("--threads", type=int, default=_default_threads(),
                   help=f"worker threads (default ${THREADS_ENV} or 1); output is identical "
                   "for any thread count")
    _add_norm_flags(p)
    p.set_defaults(func=cmd_stream)

    p = sub.add_parser("score", help="WER/CER and OOV precision/recall/F-score")
    p.add_argument("--train", required=True, help="training transcripts (defines OOV)")
    p.add_argument("--ref", required=True, help="reference transcripts")
    p.add_argument("--hyp", required=True, help="hypothesis transcripts")
    p.add_argument("--output", default=None, help="report file (default: stdout)")
    p.add_argument("--unit", default="both", choices=("word", "character", "both"))
    p.add_argument("--by-id", action="store_true", help="pair ref/hyp by utterance id")
    p.add_argument("--per-utterance-fp", action="store_true",
                   help="scope the fp reference vocabulary per utterance instead of globally")
    _add_norm_flags(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("stats", help="token distribution statistics over simulated epochs")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--mode", required=True, choices=[m.value for m in augment_mod.Mode])
    p.add_argument("--epochs", required=True, type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dropout", "-p", type=float, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--l", type=_parse_l, default=None)
    p.add_argument("--outdir", required=True, help="directory for the CSV reports")
    p.add_argument("--train", default=None, help="training transcripts for the OOV length profile")
    p.add_argument("--ref", default=None, help="reference transcripts for the OOV length profile")
    p.add_argument("--hyp", default=None, help="hypothesis transcripts for the OOV length profile")
    _add_norm_flags(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("version", help="print tool and model-format versions")
    p.set_defaults(func=cmd_version)

    return parser


def _augment_config(mode_value: str, args: argparse.Namespace) -> augment_mod.AugmentConfig:
    mode = augment_mod.Mode(mode_value)
    dropout = getattr(args, "dropout", None)
    alpha = getattr(args, "alpha", None)
    l_value = getattr(args, "l", None)
    if mode is not augment_mod.Mode.BPE_DROPOUT and dropout is not None:
        raise ConfigError(f"--dropout does not apply to mode {mode.value}")
    if mode is not augment_mod.Mode.ULM_SAMPLE and (alpha is not None or l_value is not None):
        raise ConfigError(f"--alpha/--l do not apply to mode {mode.value}")
    p = None
    sampling = None
    if mode is augment_mod.Mode.BPE_DROPOUT:
        p = 0.1 if dropout is None else dropout
    if mode is augment_mod.Mode.ULM_SAMPLE:
        sampling = ulm_mod.SamplingConfig(
            alpha=0.1 if alpha is None else alpha,
            l=math.inf if l_value is None else l_value,
        )
    return augment_mod.AugmentConfig(mode=mode, p=p, sampling=sampling, seed=args.seed)


def cmd_train(args: argparse.Namespace) -> int:
    corpus = ingest_file(args.input, _norm_config(args))
    counts = word_counts(corpus)
    if args.kind == "bpe":
        model = bpe_mod.train_bpe(
            counts,
            args.vocab_size,
            eow_mark=args.eow_mark,
            min_pair_count=args.min_pair_count,
        )
        bpe_mod.save_bpe(model, args.output)
    else:
        model = ulm_mod.train_ulm(
            counts,
            args.vocab_size,
            shrink_factor=args.shrink_factor,
            em_subiters=args.em_subiters,
            max_piece_len=args.max_piece_len,
            max_seed_size=args.max_seed_size,
        )
        ulm_mod.save_ulm(model, args.output)
    return 0


def _encode_lines(
    corpus_path: str,
    args: argparse.Namespace,
    config: augment_mod.AugmentConfig,
    model: augment_mod.Model,
    epoch: int = 0,
) -> Iterator[str]:
    corpus = ingest_file(corpus_path, _norm_config(args))
    index = augment_mod.build_index(model)
    for utt, word_seqs in augment_mod.iter_epoch_word_tokens(corpus, model, config, epoch):
        tokens = augment_mod.utterance_tokens(word_seqs, config.mode)
        ids = augment_mod.utterance_ids(index, word_seqs, config.mode)
        if args.format == "tokens":
            yield f"{utt.id}\t{' '.join(tokens)}"
        elif args.format == "ids":
            yield augment_mod.format_stream_line(utt.id, ids)
        else:
            yield f"{utt.id}\t{' '.join(tokens)}\t{' '.join(str(i) for i in ids)}"


def cmd_encode(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    if isinstance(model, bpe_mod.BpeModel):
        mode = augment_mod.Mode.BPE_DROPOUT if args.dropout is not None else augment_mod.Mode.DETERMINISTIC_BPE
    else:
        if args.dropout is not None:
            raise ModelFormatError("--dropout requires a BPE model")
        mode = augment_mod.Mode.ULM_VITERBI
    config = augment_mod.AugmentConfig(mode=mode, p=args.dropout, seed=args.seed)
    _write_lines(args.output, _encode_lines(args.input, args, config, model))
    return 0


def cmd_sample(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    if not isinstance(model, ulm_mod.UnigramModel):
        raise ModelFormatError("sample requires a unigram model")
    config = augment_mod.AugmentConfig(
        mode=augment_mod.Mode.ULM_SAMPLE,
        sampling=ulm_mod.SamplingConfig(alpha=args.alpha, l=args.l),
        seed=args.seed,
    )
    _write_lines(args.output, _encode_lines(args.input, args, config, model))
    return 0


def cmd_stream(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    config = _augment_config(args.mode, args)
    augment_mod.check_model_mode(model, config.mode)
    corpus = ingest_file(args.input, _norm_config(args))
    index = augment_mod.build_index(model)

    def produce(item: tuple[int, object]) -> tuple[str, list[str], list[int]]:
        ordinal, utt = item
        rng = augment_mod.derive_rng(config.seed, args.epoch, ordinal)
        seqs = [augment_mod.segment_word(model, word, config, rng) for word in utt.words]
        return (
            utt.id,
            augment_mod.utterance_tokens(seqs, config.mode),
            augment_mod.utterance_ids(index, seqs, config.mode),
        )

    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            results = list(pool.map(produce, enumerate(corpus), chunksize=64))
        augment_mod.write_stream(args.output, ((utt_id, ids) for utt_id, _, ids in results))
        if args.tokens:
            augment_mod.write_token_stream(
                args.output + ".tokens", ((utt_id, tokens) for utt_id, tokens, _ in results)
            )
        return 0

    if args.tokens:
        # two lazy passes keep the single-threaded path at O(1) utterances
        augment_mod.write_stream(
            args.output, ((uid, ids) for uid, _, ids in map(produce, enumerate(corpus)))
        )
        augment_mod.write_token_stream(
            args.output + ".tokens",
            ((uid, tokens) for uid, tokens, _ in map(produce, enumerate(corpus))),
        )
    else:
        augment_mod.write_stream(
            args.output, ((uid, ids) for uid, _, ids in map(produce, enumerate(corpus)))
        )
    return 0


def _format_value(value: float | int) -> str:
    if isinstance(value, int):
        return str(value)
    return str(round(value, 6))


def cmd_score(args: argparse.Namespace) -> int:
    norm = _norm_config(args)
    train_corpus = ingest_file(args.train, norm)
    ref_corpus = ingest_file(args.ref, norm)
    hyp_corpus = ingest_file(args.hyp, norm)
    pairs = metrics_mod.pair_corpora(ref_corpus, hyp_corpus, by_id=args.by_id)
    train_words = train_word_set(train_corpus)

    lines: list[str] = []
    if args.unit in ("word", "both"):
        wer = metrics_mod.edit_distance_report(pairs, unit="word")
        lines.append(f"wer_percent\t{wer.wer:.2f}")
        lines.append(f"word_substitutions\t{wer.substitutions}")
        lines.append(f"word_insertions\t{wer.insertions}")
        lines.append(f"word_deletions\t{wer.deletions}")
        lines.append(f"word_ref_tokens\t{wer.ref_tokens}")
    if args.unit in ("character", "both"):
        cer = metrics_mod.edit_distance_report(pairs, unit="character")
        lines.append(f"cer_percent\t{cer.wer:.2f}")
        lines.append(f"char_substitutions\t{cer.substitutions}")
        lines.append(f"char_insertions\t{cer.insertions}")
        lines.append(f"char_deletions\t{cer.deletions}")
        lines.append(f"char_ref_tokens\t{cer.ref_tokens}")
    oov = metrics_mod.oov_score(train_words, pairs, per_utterance_fp=args.per_utterance_fp)
    for key, value in oov.as_dict().items():
        lines.append(f"{key}\t{_format_value(value)}")
    if not metrics_mod.oov_set(train_words, ref_corpus):
        lines.append("note\tno OOV words in references")
    _write_lines(args.output, lines)
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    config = _augment_config(args.mode, args)
    augment_mod.check_model_mode(model, config.mode)
    corpus = ingest_file(args.input, _norm_config(args))
    stats = stats_mod.simulate_epochs(corpus, model, config, args.epochs)

    profile = None
    oov_args = (args.train, args.ref, args.hyp)
    if any(oov_args):
        if not all(oov_args):
            raise ConfigError("--train, --ref and --hyp must be given together")
        norm = _norm_config(args)
        train_words = train_word_set(ingest_file(args.train, norm))
        pairs = metrics_mod.pair_corpora(ingest_file(args.ref, norm), ingest_file(args.hyp, norm))
        tp_words = metrics_mod.oov_true_positive_words(train_words, pairs)
        profile = stats_mod.oov_token_length_profile(model, tp_words)

    written = stats_mod.write_reports(stats, args.outdir, profile)
    summary = [
        f"total_occurrences\t{stats.total_occurrences}",
        f"distinct_tokens\t{len(stats.token_counts)}",
        f"single_char_share\t{stats_mod.short_token_share(stats, 1):.4f}",
    ]
    summary += [f"report\t{path}" for path in written]
    _write_lines(None, summary)
    return 0


def cmd_version(args: argparse.Namespace) -> int:
    print(f"subtok {__version__} (model formats: {bpe_mod.BPE_FORMAT_VERSION}, {ulm_mod.ULM_FORMAT_VERSION})")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on bad/unknown flags
        return int(exc.code or 0)
    if not getattr(args, "func", None):
        parser.print_help()
        return 2
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"subtok: configuration error: {exc}", file=sys.stderr)
        return 2
    except IngestError as exc:
        print(f"subtok: input error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"subtok: i/o error: {exc}", file=sys.stderr)
        return 1
    except (ModelFormatError, UnknownTokenError, PairingError, TrainingError) as exc:
        print(f"subtok: {exc}", file=sys.stderr)
        return 3
    except SubtokError as exc:
        print(f"subtok: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
