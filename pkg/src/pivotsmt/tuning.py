"""Weight tuning by coordinate ascent over a merged n-best pool.

Each round decodes the dev set with the current weights, merges the
n-best lists into a growing pool, then sweeps every feature through a
21-point grid spanning [-1, 3] times the current value (times 1.0 when
the current value is zero), keeping a move only when it strictly improves
corpus BLEU of the pool-rescored selection.  The sweep on a fixed pool
never decreases BLEU; tuning stops when a round gains less than 0.001.
"""

from __future__ import annotations

from .corpus import Sentence
from .decoder import DecoderConfig, default_weights, feature_names, nbest
from .errors import TuningError
from .metrics import BleuStats, bleu_from_stats, sentence_stats

GRID = tuple(-1.0 + 0.2 * k for k in range(21))
MIN_GAIN = 0.001

PoolEntry = tuple[tuple[str, ...], tuple[float, ...], BleuStats]
# (target tokens, feature values in canonical order, BLEU stats vs reference)


def make_pool_entry(
    tokens: tuple[str, ...],
    features: dict[str, float],
    ref: Sentence,
    names: tuple[str, ...],
) -> PoolEntry:
    return (tokens, tuple(features[n] for n in names), sentence_stats(tokens, ref))


def pool_bleu(
    pool: list[list[PoolEntry]], weight_vec: tuple[float, ...]
) -> float:
    """Corpus BLEU of the per-sentence argmax selection under weight_vec."""
    total = BleuStats()
    for entries in pool:
        best = min(
            entries,
            key=lambda e: (-sum(w * h for w, h in zip(weight_vec, e[1])), e[0]),
        )
        total = total + best[2]
    return bleu_from_stats(total).bleu


def sweep_weights(
    pool: list[list[PoolEntry]],
    weights: dict[str, float],
    names: tuple[str, ...],
) -> tuple[dict[str, float], float]:
    """One coordinate-ascent pass; returns updated weights and pool BLEU."""
    weights = dict(weights)
    current = pool_bleu(pool, tuple(weights[n] for n in names))
    for name in names:
        scale = weights[name] if abs(weights[name]) > 1e-12 else 1.0
        best_value, best_bleu = weights[name], current
        for g in GRID:
            value = g * scale
            if value == weights[name]:
                continue
            trial = dict(weights)
            trial[name] = value
            score = pool_bleu(pool, tuple(trial[n] for n in names))
            if score > best_bleu + 1e-12:
                best_value, best_bleu = value, score
        weights[name] = best_value
        current = best_bleu
    return weights, current


def tune_weights(
    dev: list[tuple[Sentence, Sentence]],
    table,
    reo_table,
    model,
    config: DecoderConfig,
    rounds: int = 5,
    initial: dict[str, float] | None = None,
) -> tuple[dict[str, float], list[float]]:
    """Decode/merge/sweep loop; returns final weights and per-round BLEUs."""
    if not dev:
        raise TuningError("empty development set")
    if rounds < 1:
        raise TuningError("rounds must be >= 1")
    names = feature_names(config.use_lex_reordering)
    weights = dict(initial) if initial else default_weights(config.use_lex_reordering)
    pool: list[dict] = [dict() for _ in dev]
    history: list[float] = []
    for _ in range(rounds):
        for k, (src, ref) in enumerate(dev):
            for cand in nbest(src, table, reo_table, model, weights, config):
                entry = make_pool_entry(cand.tokens, cand.features, ref, names)
                pool[k].setdefault((entry[0], entry[1]), entry)
        merged = [sorted(p.values(), key=lambda e: (e[0], e[1])) for p in pool]
        weights, bleu = sweep_weights(merged, weights, names)
        if history and bleu - history[-1] < MIN_GAIN:
            history.append(bleu)
            break
        history.append(bleu)
    return weights, history
