import random
import warnings

import pytest

from oracles import brute_force_decode, brute_force_topk
from toys import random_toy_instance
from pivotsmt import lm as lm_mod
from pivotsmt.decoder import (
    DecoderConfig,
    build_options,
    decode,
    default_weights,
    distortion_cost,
    feature_names,
    load_weights,
    nbest,
    read_nbest,
    save_weights,
    validate_weights,
    write_nbest,
)
from pivotsmt.errors import ConfigError
from pivotsmt.phrases import PhraseEntry, PhraseTable


class TestDistortionCost:
    def test_monotone_adjacency_is_free(self):
        assert distortion_cost(1, 2) == 0

    def test_forward_jump(self):
        assert distortion_cost(1, 5) == 3

    def test_backward_jump(self):
        assert distortion_cost(4, 2) == 3

    def test_cost_linear_in_distance(self):
        for d in range(1, 6):
            assert distortion_cost(0, 1 + d) == d
            assert distortion_cost(0, 1 + 2 * d) == 2 * d


def simple_table():
    table = PhraseTable()
    table.entries[("der", "hund")][("the", "dog")] = PhraseEntry(
        0.9, 0.8, 0.7, 0.6, 1, 1, 1
    )
    table.entries[("der",)][("the",)] = PhraseEntry(0.5, 0.5, 0.5, 0.5, 1, 1, 1)
    table.entries[("hund",)][("dog",)] = PhraseEntry(0.4, 0.4, 0.4, 0.4, 1, 1, 1)
    return table


def simple_lm():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return lm_mod.train_kn([("the", "dog"), ("the", "cat")], 2)


def plain_config(**kw):
    kw.setdefault("use_lex_reordering", False)
    kw.setdefault("beam_size", 100)
    kw.setdefault("nbest_size", 10)
    return DecoderConfig(**kw)


class TestDecode:
    def test_single_phrase_covers_source(self):
        table = simple_table()
        model = simple_lm()
        weights = default_weights(False)
        got = decode(("der", "hund"), table, None, model, weights, plain_config())
        assert got.tokens == ("the", "dog")
        dot = sum(weights[k] * v for k, v in got.features.items())
        assert got.score == pytest.approx(dot, abs=1e-9)

    def test_oov_copies_through_with_floor(self):
        got = decode(
            ("qqq",), simple_table(), None, simple_lm(), default_weights(False),
            plain_config(),
        )
        assert got.tokens == ("qqq",)
        assert got.features["tm_tgs"] == -10.0

    def test_empty_source_empty_translation(self):
        got = decode(
            (), simple_table(), None, simple_lm(), default_weights(False),
            plain_config(),
        )
        assert got.tokens == ()
        assert got.features["phrase_penalty"] == 0.0
        assert got.features["lm"] < 0.0

    def test_weight_mismatch_rejected(self):
        weights = default_weights(False)
        weights.pop("lm")
        with pytest.raises(ConfigError):
            decode(("der",), simple_table(), None, simple_lm(), weights,
                   plain_config())
        with pytest.raises(ConfigError):
            validate_weights(default_weights(False), use_lex_reordering=True)

    def test_matches_brute_force_on_toys(self):
        rng = random.Random(2024)
        for case in range(60):
            use_reo = case % 2 == 0
            source, table, reo, model, weights, limit = random_toy_instance(
                rng, use_reo
            )
            config = DecoderConfig(
                beam_size=2000,
                distortion_limit=limit,
                nbest_size=5,
                use_lex_reordering=use_reo,
            )
            got = decode(source, table, reo, model, weights, config)
            options = build_options(source, table, reo, config)
            scored = brute_force_decode(
                len(source), options, weights,
                lambda t: lm_mod.logprob(model, t), use_reo, limit,
            )
            assert scored, "toy instance must be solvable"
            assert got.score == pytest.approx(scored[0][0], abs=1e-9)
            assert got.tokens == scored[0][1]

    def test_deterministic_across_runs(self):
        rng = random.Random(5)
        source, table, reo, model, weights, limit = random_toy_instance(rng, True)
        config = DecoderConfig(
            beam_size=50, distortion_limit=limit, nbest_size=5,
            use_lex_reordering=True,
        )
        a = decode(source, table, reo, model, weights, config)
        b = decode(source, table, reo, model, weights, config)
        assert a.tokens == b.tokens
        assert a.score == b.score
        assert a.features == b.features


class TestNBest:
    def test_size_one_equals_decode(self):
        table, model = simple_table(), simple_lm()
        weights = default_weights(False)
        config = plain_config(nbest_size=1)
        lists = nbest(("der", "hund"), table, None, model, weights, config)
        best = decode(("der", "hund"), table, None, model, weights, config)
        assert len(lists) == 1
        assert lists[0].tokens == best.tokens
        assert lists[0].score == pytest.approx(best.score, abs=1e-12)

    def test_scores_non_increasing_strings_distinct(self):
        rng = random.Random(31)
        for _ in range(20):
            source, table, reo, model, weights, limit = random_toy_instance(
                rng, False
            )
            config = DecoderConfig(
                beam_size=500, distortion_limit=limit, nbest_size=8,
                use_lex_reordering=False,
            )
            lists = nbest(source, table, reo, model, weights, config)
            assert lists
            strings = [h.tokens for h in lists]
            assert len(set(strings)) == len(strings)
            scores = [h.score for h in lists]
            assert all(a >= b - 1e-12 for a, b in zip(scores, scores[1:]))

    def test_matches_brute_force_topk(self):
        rng = random.Random(404)
        for case in range(30):
            use_reo = case % 2 == 1
            source, table, reo, model, weights, limit = random_toy_instance(
                rng, use_reo
            )
            config = DecoderConfig(
                beam_size=2000, distortion_limit=limit, nbest_size=4,
                use_lex_reordering=use_reo,
            )
            got = nbest(source, table, reo, model, weights, config)
            options = build_options(source, table, reo, config)
            scored = brute_force_decode(
                len(source), options, weights,
                lambda t: lm_mod.logprob(model, t), use_reo, limit,
            )
            want = brute_force_topk(scored, 4)
            assert [h.tokens for h in got] == [t for _, t in want]
            for h, (score, _) in zip(got, want):
                assert h.score == pytest.approx(score, abs=1e-9)

    def test_raising_word_penalty_never_lengthens_output(self):
        rng = random.Random(61)
        for _ in range(20):
            source, table, reo, model, weights, limit = random_toy_instance(
                rng, False
            )
            config = DecoderConfig(
                beam_size=500, distortion_limit=limit, nbest_size=50,
                use_lex_reordering=False,
            )
            pool = nbest(source, table, reo, model, weights, config)
            lengths = []
            for wp in (-1.0, 0.0, 1.0, 2.0):
                trial = dict(weights)
                trial["word_penalty"] = wp
                best = min(
                    pool,
                    key=lambda h: (
                        -sum(trial[k] * v for k, v in h.features.items()),
                        h.tokens,
                    ),
                )
                lengths.append(len(best.tokens))
            assert all(a >= b for a, b in zip(lengths, lengths[1:]))


class TestWeightsIO:
    def test_round_trip(self, tmp_path):
        weights = default_weights(True)
        weights["lm"] = 1.2345678901234
        path = str(tmp_path / "weights.txt")
        save_weights(weights, path)
        assert load_weights(path) == weights

    def test_nbest_file_round_trip(self, tmp_path):
        table, model = simple_table(), simple_lm()
        config = plain_config(nbest_size=5)
        lists = [
            nbest(("der", "hund"), table, None, model, default_weights(False), config),
            nbest(("hund",), table, None, model, default_weights(False), config),
        ]
        path = str(tmp_path / "nbest.txt")
        write_nbest(path, lists)
        again = read_nbest(path)
        assert set(again) == {0, 1}
        for sid, cands in again.items():
            assert [c.tokens for c in cands] == [c.tokens for c in lists[sid]]
            assert [c.score for c in cands] == [c.score for c in lists[sid]]
            assert [c.features for c in cands] == [c.features for c in lists[sid]]

    def test_feature_names_sizes(self):
        assert len(feature_names(False)) == 8
        assert len(feature_names(True)) == 14
