from __future__ import annotations

import random
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from subtok.bpe import (
    BpeModel,
    MergeRule,
    dump_vocab,
    encode,
    encode_dropout,
    load_bpe,
    save_bpe,
    train_bpe,
    word_symbols,
)
from subtok.corpus import WordCounts
from subtok.errors import ConfigError
from subtok.tokens import detokenize

from conftest import TOY_BASE_VOCAB_SIZE, TOY_MERGES
from oracles import simulate_dropout

WORDS = st.text(alphabet="abcdef", min_size=1, max_size=10)


class TestTrain:
    def test_toy_corpus_merge_sequence_matches_hand_run(self, toy_bpe):
        assert [(m.left, m.right) for m in toy_bpe.merges] == TOY_MERGES
        assert [m.priority for m in toy_bpe.merges] == [0, 1, 2, 3]

    def test_toy_base_vocab_size(self, toy_counts):
        model = train_bpe(toy_counts, TOY_BASE_VOCAB_SIZE)
        assert model.merges == ()
        assert len(model.vocab) == TOY_BASE_VOCAB_SIZE

    def test_single_pair_corpus(self):
        # {aa: 1}: the only pair is (a, a</w>); it occurs once, so the default
        # minimum pair frequency of 2 must be relaxed for the merge to happen.
        counts = WordCounts.from_counter({"aa": 1})
        model = train_bpe(counts, 2 + 1, min_pair_count=1)
        assert [(m.left, m.right) for m in model.merges] == [("a", "a</w>")]

    def test_single_pair_corpus_below_min_frequency(self):
        counts = WordCounts.from_counter({"aa": 1})
        assert train_bpe(counts, 2 + 1).merges == ()

    def test_target_equal_to_char_vocab_means_no_merges(self, toy_counts, toy_bpe):
        model = train_bpe(toy_counts, TOY_BASE_VOCAB_SIZE)
        assert model.merges == ()
        seq = encode(model, "low")
        assert seq.tokens == ("l", "o", "w</w>")

    def test_target_below_char_vocab_rejected(self, toy_counts):
        with pytest.raises(ConfigError) as excinfo:
            train_bpe(toy_counts, TOY_BASE_VOCAB_SIZE - 1)
        assert str(TOY_BASE_VOCAB_SIZE) in str(excinfo.value)

    def test_merge_replay_reproduces_training_pair_statistics(self, toy_counts):
        # replay the learned merges over the corpus and recount pair
        # frequencies before each merge; they must match what the trainer saw
        stats: list[tuple[tuple[str, str], int]] = []
        model = train_bpe(toy_counts, TOY_BASE_VOCAB_SIZE + 4, merge_stats=stats)
        words = {tuple(word_symbols(w)): c for w, c in toy_counts.items()}
        for rule, (pair, seen) in zip(model.merges, stats):
            recount = Counter()
            for symbols, count in words.items():
                for a, b in zip(symbols, symbols[1:]):
                    recount[(a, b)] += count
            assert recount[(rule.left, rule.right)] == seen
            assert max(recount.values()) == seen
            new_words = {}
            for symbols, count in words.items():
                out: list[str] = []
                i = 0
                while i < len(symbols):
                    if i + 1 < len(symbols) and (symbols[i], symbols[i + 1]) == pair:
                        out.append(symbols[i] + symbols[i + 1])
                        i += 2
                    else:
                        out.append(symbols[i])
                        i += 1
                new_words[tuple(out)] = count
            words = new_words

    def test_vocab_contains_all_training_characters(self, counts_1k, bpe_1k):
        for word in counts_1k.words():
            for symbol in word_symbols(word):
                assert symbol in bpe_1k.vocab

    def test_merge_tokens_in_vocab(self, bpe_1k):
        for rule in bpe_1k.merges:
            assert rule.token in bpe_1k.vocab

    def test_eow_collision_rejected(self):
        counts = WordCounts.from_counter({"a</w>b": 1})
        with pytest.raises(ConfigError):
            train_bpe(counts, 100)

    def test_matches_naive_reference_trainer_on_random_corpora(self):
        # guards the incremental pair bookkeeping against a full-recount oracle
        from oracles import naive_bpe_merges

        rng = random.Random(606)
        for _ in range(15):
            words = {}
            for _ in range(rng.randint(3, 12)):
                word = "".join(rng.choice("abcd") for _ in range(rng.randint(1, 7)))
                words[word] = words.get(word, 0) + rng.randint(1, 6)
            counts = WordCounts.from_counter(words)
            base = {s for w in counts.words() for s in word_symbols(w)}
            n_merges = rng.randint(0, 10)
            model = train_bpe(counts, len(base) + n_merges)
            want = naive_bpe_merges(words, len(model.merges))
            assert [(m.left, m.right) for m in model.merges] == want


class TestEncode:
    def test_zero_merge_model_splits_characters(self):
        model = BpeModel(merges=(), vocab=frozenset({"a", "b</w>"}))
        assert encode(model, "ab").tokens == ("a", "b</w>")

    def test_toy_model_encodes_lowest_like_the_hand_replay(self, toy_bpe):
        # hand merge replay: e+s, es+t</w>, l+o, then nothing applies
        assert encode(toy_bpe, "lowest").tokens == ("lo", "w", "est</w>")

    def test_training_words_round_trip(self, toy_counts, toy_bpe):
        for word in toy_counts.words():
            assert detokenize(encode(toy_bpe, word)) == word

    @given(word=WORDS)
    def test_round_trip_any_word(self, toy_bpe, word):
        assert detokenize(encode(toy_bpe, word)) == word

    def test_unknown_characters_pass_through_flagged(self, toy_bpe):
        seq = encode(toy_bpe, "lox")
        assert detokenize(seq) == "lox"
        assert seq.has_unknown
        assert all(seq.tokens[i] not in toy_bpe.vocab for i in seq.unknown_positions)

    def test_empty_and_whitespace_words_rejected(self, toy_bpe):
        with pytest.raises(ConfigError):
            encode(toy_bpe, "")
        with pytest.raises(ConfigError):
            encode(toy_bpe, "a b")

    def test_every_token_in_vocab_or_unknown_single_char(self, bpe_1k, counts_1k):
        eow = bpe_1k.eow_mark
        for word in list(counts_1k.words())[:300]:
            for i, token in enumerate(encode(bpe_1k, word).tokens):
                base = token[: -len(eow)] if token.endswith(eow) else token
                assert token in bpe_1k.vocab or len(base) == 1


class TestEncodeDropout:
    def test_p_zero_equals_deterministic(self, bpe_1k, counts_1k):
        rng = random.Random(123)
        for word in counts_1k.words():
            assert encode_dropout(bpe_1k, word, 0.0, rng).tokens == encode(bpe_1k, word).tokens

    def test_p_one_yields_single_characters(self, bpe_1k, counts_1k):
        rng = random.Random(123)
        for word in counts_1k.words():
            seq = encode_dropout(bpe_1k, word, 1.0, rng)
            assert seq.tokens == tuple(word_symbols(word))

    def test_p_out_of_range_rejected(self, toy_bpe):
        rng = random.Random(0)
        for bad in (-0.1, 1.1):
            with pytest.raises(ConfigError):
                encode_dropout(toy_bpe, "low", bad, rng)

    def test_fixed_seed_bit_reproducible(self, toy_bpe):
        draws_a = [encode_dropout(toy_bpe, "lower", 0.5, random.Random(99)).tokens for _ in range(50)]
        draws_b = [encode_dropout(toy_bpe, "lower", 0.5, random.Random(99)).tokens for _ in range(50)]
        assert draws_a == draws_b

    def test_matches_step_by_step_simulation_draw_for_draw(self, toy_bpe):
        # same seed sequence in both processes: outputs must be identical at
        # every draw, which also makes the empirical distributions equal
        merge_table = [(m.left, m.right) for m in toy_bpe.merges]
        rng_impl = random.Random(4242)
        rng_oracle = random.Random(4242)
        outcomes_impl = Counter()
        outcomes_oracle = Counter()
        for _ in range(10000):
            got = encode_dropout(toy_bpe, "lower", 0.5, rng_impl).tokens
            want = simulate_dropout(merge_table, "lower", toy_bpe.eow_mark, 0.5, rng_oracle)
            assert got == want
            outcomes_impl[got] += 1
            outcomes_oracle[want] += 1
        assert outcomes_impl == outcomes_oracle
        assert len(outcomes_impl) > 1

    @given(word=WORDS, p=st.floats(0.0, 1.0), seed=st.integers(0, 2**32))
    @settings(max_examples=60)
    def test_round_trip_under_dropout(self, toy_bpe, word, p, seed):
        seq = encode_dropout(toy_bpe, word, p, random.Random(seed))
        assert detokenize(seq) == word

    def test_expected_token_count_nondecreasing_in_p(self, bpe_1k, counts_1k):
        # >= 10k samples per setting over a fixed corpus; strict between 0 and 1
        words = list(counts_1k.words())
        means = []
        for p in (0.0, 0.1, 0.5, 1.0):
            rng = random.Random(7)
            total = 0
            n = 0
            while n < 10000:
                for word in words:
                    total += len(encode_dropout(bpe_1k, word, p, rng))
                    n += 1
                    if n >= 10000:
                        break
            means.append(total / n)
        assert means == sorted(means)
        assert means[-1] > means[0]


class TestDetokenize:
    def test_empty(self):
        assert detokenize([]) == ""

    def test_single_word(self):
        assert detokenize(["lo", "w</w>"]) == "low"

    def test_utterance_stream(self):
        assert detokenize(["lo", "w</w>", "a</w>", "b", "c</w>"]) == "low a bc"

    def test_token_seq_accepted(self, toy_bpe):
        assert detokenize(encode(toy_bpe, "low")) == "low"


class TestSerialization:
    def test_round_trip(self, toy_bpe, tmp_path):
        path = str(tmp_path / "toy.bpe")
        save_bpe(toy_bpe, path)
        again = load_bpe(path)
        assert again == toy_bpe

    def test_files_round_trip_byte_identical(self, toy_bpe, tmp_path):
        path_a = str(tmp_path / "a.bpe")
        path_b = str(tmp_path / "b.bpe")
        save_bpe(toy_bpe, path_a)
        save_bpe(load_bpe(path_a), path_b)
        assert open(path_a, "rb").read() == open(path_b, "rb").read()
        assert open(path_a + ".vocab", "rb").read() == open(path_b + ".vocab", "rb").read()

    def test_merge_file_format(self, toy_bpe, tmp_path):
        path = str(tmp_path / "toy.bpe")
        save_bpe(toy_bpe, path)
        lines = open(path, encoding="utf-8").read().splitlines()
        assert lines[0].startswith("subtok-bpe v1")
        assert lines[1:] == [f"{left} {right}" for left, right in TOY_MERGES]

    def test_vocab_file_one_token_per_line(self, toy_bpe, tmp_path):
        path = str(tmp_path / "toy.bpe")
        save_bpe(toy_bpe, path)
        tokens = open(path + ".vocab", encoding="utf-8").read().splitlines()
        assert set(tokens) == set(toy_bpe.vocab)
        assert tokens == dump_vocab(toy_bpe)

    def test_dump_order_stable(self, toy_bpe):
        order = dump_vocab(toy_bpe)
        assert order[: TOY_BASE_VOCAB_SIZE] == sorted(order[:TOY_BASE_VOCAB_SIZE - 3]) + sorted(order[TOY_BASE_VOCAB_SIZE - 3 : TOY_BASE_VOCAB_SIZE])
        assert order[TOY_BASE_VOCAB_SIZE:] == [m.left + m.right for m in toy_bpe.merges]
