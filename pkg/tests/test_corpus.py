import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pivotsmt import lm as lm_mod
from pivotsmt.corpus import (
    ParallelCorpus,
    filter_corpus,
    select_dev_test,
    tokenize,
)
from pivotsmt.errors import ConfigError, DataError, SelectionError


class TestTokenize:
    def test_lowercase_splits_punctuation(self):
        assert tokenize("Hello, world.", "lowercase") == ("hello", ",", "world", ".")

    def test_pretokenized_collapses_whitespace(self):
        assert tokenize("a  b", "pretokenized") == ("a", "b")

    def test_unicode_punctuation(self):
        assert tokenize("¿Qué?", "lowercase") == ("¿", "qué", "?")

    def test_standard_keeps_case(self):
        assert tokenize("Ab cD", "standard") == ("Ab", "cD")

    def test_digits_stay_joined(self):
        assert tokenize("x42, y", "standard") == ("x42", ",", "y")

    def test_invalid_utf8_reports_offset(self):
        with pytest.raises(DataError, match="byte offset 2"):
            tokenize(b"ab\xff", "standard")

    def test_unknown_profile(self):
        with pytest.raises(ConfigError):
            tokenize("a", "nope")

    @given(st.text(max_size=40), st.sampled_from(["standard", "lowercase", "pretokenized"]))
    @settings(max_examples=300)
    def test_idempotent_on_own_output(self, text, profile):
        once = tokenize(text, profile)
        assert tokenize(" ".join(once), profile) == once
        assert all(tok and not any(c.isspace() for c in tok) for tok in once)


def corpus_of(rows, langs=("s", "p", "t")):
    return ParallelCorpus(langs, [tuple(tuple(x.split()) for x in row) for row in rows])


class TestFilterCorpus:
    def test_row_at_101_tokens_removed(self):
        long = " ".join(["w"] * 101)
        short = " ".join(["w"] * 10)
        corpus = corpus_of([(long, short, short), (short, short, short)])
        assert len(filter_corpus(corpus, 100, 3.0, "p")) == 1

    def test_row_at_exactly_100_kept(self):
        row = (" ".join(["w"] * 100),) * 3
        assert len(filter_corpus(corpus_of([row]), 100, 3.0, "p")) == 1

    def test_balanced_row_kept(self):
        row = (" ".join(["w"] * 10),) * 3
        assert len(filter_corpus(corpus_of([row]), 100, 3.0, "p")) == 1

    def test_ratio_above_three_removed(self):
        row = (" ".join(["w"] * 4), " ".join(["w"] * 13), " ".join(["w"] * 13))
        assert len(filter_corpus(corpus_of([row]), 100, 3.0, "p")) == 0

    def test_ratio_exactly_three_kept(self):
        row = (" ".join(["w"] * 4), " ".join(["w"] * 12), " ".join(["w"] * 12))
        assert len(filter_corpus(corpus_of([row]), 100, 3.0, "p")) == 1

    def test_ratio_checked_in_both_directions(self):
        row = (" ".join(["w"] * 13), " ".join(["w"] * 4), " ".join(["w"] * 4))
        assert len(filter_corpus(corpus_of([row]), 100, 3.0, "p")) == 0

    def test_empty_side_removed(self):
        corpus = ParallelCorpus(("s", "p"), [((), ("w",))])
        assert len(filter_corpus(corpus, 100, 3.0, "p")) == 0

    def test_unknown_pivot_lang(self):
        with pytest.raises(ConfigError):
            filter_corpus(corpus_of([("a", "b", "c")]), 100, 3.0, "xx")

    @given(st.data())
    @settings(max_examples=100)
    def test_survivors_satisfy_constraints(self, data):
        rows = data.draw(
            st.lists(
                st.tuples(
                    st.integers(0, 8), st.integers(0, 8), st.integers(0, 8)
                ),
                max_size=20,
            )
        )
        corpus = ParallelCorpus(
            ("s", "p", "t"),
            [tuple(("w",) * n for n in row) for row in rows],
        )
        kept = filter_corpus(corpus, max_len=6, max_ratio=2.0, pivot_lang="p")
        assert len(kept) <= len(corpus)
        for row in kept.rows:
            lens = [len(s) for s in row]
            assert all(1 <= n <= 6 for n in lens)
            pl = lens[1]
            assert all(max(n, pl) <= 2.0 * min(n, pl) for n in (lens[0], lens[2]))


def toy_lm(sentences):
    return lm_mod.train_kn([tuple(s.split()) for s in sentences], 1)


class TestSelectDevTest:
    def test_all_duplicated_rows_error(self):
        corpus = corpus_of([("a b", "a b", "a b")] * 4)
        model = toy_lm(["a b"])
        with pytest.raises(SelectionError, match="0"):
            select_dev_test(corpus, model, "s", 1, 1)

    def test_highest_perplexity_row_selected(self):
        # "zz zz" is far less probable than "a a" under an LM trained on a's
        corpus = corpus_of([("a a", "x", "y"), ("zz zz", "x x", "y y")])
        model = toy_lm(["a a a a", "a a", "zz"])
        split = select_dev_test(corpus, model, "s", 1, 0, pool_factor=1)
        assert split.dev.rows[0][0] == ("zz", "zz")
        assert len(split.train) == 1 and len(split.test) == 0

    def test_oov_criterion_within_pool(self):
        # pool_factor=1 keeps the two highest-perplexity rows; within that
        # pool the lower OOV row must come first even though a third row has
        # the lowest OOV ratio overall.
        corpus = corpus_of(
            [
                ("q q q q", "p1", "t1"),  # high ppl, all OOV
                ("q q q a", "p2", "t2"),  # high ppl, 3/4 OOV
                ("a a a a", "p3", "t3"),  # low ppl, no OOV
            ]
        )
        model = toy_lm(["a a a a a"])
        split = select_dev_test(corpus, model, "s", 1, 1, pool_factor=1)
        assert split.dev.rows[0][0] == ("q", "q", "q", "a")
        assert split.test.rows[0][0] == ("q", "q", "q", "q")
        assert split.train.rows[0][0] == ("a", "a", "a", "a")

    def test_partition_and_disjointness(self):
        rng = random.Random(7)
        rows = []
        for k in range(30):
            sent = " ".join(rng.choice("abcdef") for _ in range(rng.randint(2, 6)))
            rows.append((f"u{k} " + sent, f"p{k}", f"t{k}"))
        corpus = corpus_of(rows)
        model = toy_lm([r[0] for r in rows])
        split = select_dev_test(corpus, model, "s", 4, 3)
        assert len(split.train) + len(split.dev) + len(split.test) == len(corpus)
        dev_set = {r[0] for r in split.dev.rows}
        test_set = {r[0] for r in split.test.rows}
        train_set = {r[0] for r in split.train.rows}
        assert not dev_set & test_set
        assert not dev_set & train_set
        assert not test_set & train_set
        # language ordering and row alignment preserved
        assert split.train.languages == corpus.languages

    def test_matches_lexicographic_sort_oracle(self):
        # all OOV ratios equal (LM trained on the full column), so selection
        # must equal a plain lexicographic (-perplexity, row) sort
        rng = random.Random(3)
        rows = []
        for k in range(10):
            sent = f"w{k} " + " ".join(
                rng.choice(["a", "b", "c"]) for _ in range(rng.randint(1, 5))
            )
            rows.append((sent, f"p{k}", f"t{k}"))
        corpus = corpus_of(rows)
        model = toy_lm([r[0] for r in rows])
        split = select_dev_test(corpus, model, "s", 2, 2, pool_factor=2)
        ppl = {
            r: lm_mod.perplexity(model, [corpus.rows[r][0]])
            for r in range(len(rows))
        }
        expected = sorted(range(len(rows)), key=lambda r: (-ppl[r], 0.0, r))[:4]
        got = [r for r in range(len(rows))
               if corpus.rows[r] in split.dev.rows or corpus.rows[r] in split.test.rows]
        assert sorted(expected) == sorted(got)
        # dev/test membership follows selection order; rows inside each part
        # keep their original corpus order
        assert {corpus.rows[r] for r in expected[:2]} == set(split.dev.rows)
        assert {corpus.rows[r] for r in expected[2:]} == set(split.test.rows)
