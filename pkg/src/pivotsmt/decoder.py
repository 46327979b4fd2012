"""Log-linear beam-stack phrase-based decoder with n-best extraction.

One stack per covered-word count, histogram pruning by score plus an
admissible-ish future estimate (best per-span option score chained by
dynamic programming; pruning only, never part of the final score).
Recombination keys on coverage, the last source span, and the LM state;
ties everywhere break on the lexicographic target string so results are
bit-stable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import lm as lm_mod
from .corpus import Sentence
from .errors import ConfigError, DataError
from .phrases import LexReorderingEntry, Phrase, PhraseTable

BASE_FEATURES = (
    "tm_tgs",
    "tm_sgt",
    "lex_tgs",
    "lex_sgt",
    "phrase_penalty",
    "word_penalty",
    "lm",
    "distortion",
)
REO_FEATURES = (
    "reo_prev_monotone",
    "reo_prev_swap",
    "reo_prev_discontinuous",
    "reo_next_monotone",
    "reo_next_swap",
    "reo_next_discontinuous",
)

OOV_FLOOR_LOG10 = -10.0
_TINY = 1e-30  # guards log10 against zero-valued table scores


def feature_names(use_lex_reordering: bool) -> tuple[str, ...]:
    return BASE_FEATURES + (REO_FEATURES if use_lex_reordering else ())


def default_weights(use_lex_reordering: bool) -> dict[str, float]:
    return {
        name: 0.0 if name == "word_penalty" else 1.0
        for name in feature_names(use_lex_reordering)
    }


def validate_weights(weights: dict[str, float], use_lex_reordering: bool) -> None:
    expected = set(feature_names(use_lex_reordering))
    if set(weights) != expected:
        raise ConfigError(
            f"weight vector has features {sorted(weights)}, expected "
            f"{sorted(expected)}"
        )
    for name, value in weights.items():
        if not math.isfinite(value):
            raise ConfigError(f"weight {name} is not finite")


def save_weights(weights: dict[str, float], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for name in sorted(weights):
            fh.write(f"{name} {weights[name]!r}\n")


def load_weights(path: str) -> dict[str, float]:
    weights = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise DataError(f"{path}:{lineno}: expected 'feature value'")
            weights[parts[0]] = float(parts[1])
    return weights


@dataclass
class DecoderConfig:
    beam_size: int = 100
    distortion_limit: int | None = 6
    nbest_size: int = 100
    use_lex_reordering: bool = True
    max_phrase_len: int = 10

    def __post_init__(self) -> None:
        if self.beam_size < 1:
            raise ConfigError("beam_size must be >= 1")
        if self.nbest_size < 1:
            raise ConfigError("nbest_size must be >= 1")


def distortion_cost(prev_end: int, next_start: int) -> int:
    """Skipped-word count between consecutive phrases; 0 when monotone."""
    return abs(next_start - prev_end - 1)


@dataclass(frozen=True)
class PhraseOption:
    start: int  # source span, end exclusive
    end: int
    src: Phrase
    tgt: Phrase
    scores: tuple[tuple[str, float], ...]  # log10 tm/lex feature increments
    reo: LexReorderingEntry | None
    index: int = 0


def build_options(
    source: Sentence,
    table: PhraseTable,
    reo_table: dict | None,
    config: DecoderConfig,
) -> list[PhraseOption]:
    """Applicable table phrases plus floor-scored copies for bare tokens."""
    options = []
    for i in range(len(source)):
        for j in range(i + 1, min(i + config.max_phrase_len, len(source)) + 1):
            src = source[i:j]
            for tgt, entry in table.options(src):
                scores = (
                    ("tm_tgs", math.log10(max(entry.p_t_given_s, _TINY))),
                    ("tm_sgt", math.log10(max(entry.p_s_given_t, _TINY))),
                    ("lex_tgs", math.log10(max(entry.lex_t_given_s, _TINY))),
                    ("lex_sgt", math.log10(max(entry.lex_s_given_t, _TINY))),
                )
                reo = reo_table.get((src, tgt)) if reo_table else None
                options.append(
                    PhraseOption(i, j, src, tgt, scores, reo, len(options))
                )
    for i, tok in enumerate(source):
        if (tok,) not in table:
            scores = tuple((name, OOV_FLOOR_LOG10) for name in BASE_FEATURES[:4])
            options.append(
                PhraseOption(i, i + 1, (tok,), (tok,), scores, None, len(options))
            )
    return options


@dataclass
class Hyp:
    score: float
    features: dict[str, float]
    coverage: int
    last_span: tuple[int, int]  # (start, end-exclusive); (0, 0) initially
    lm_ctx: tuple[str, ...]
    tokens: tuple[str, ...]
    last_opt: PhraseOption | None = None

    def sort_key(self, future: float):
        return (-(self.score + future), self.tokens, self.coverage, self.last_span)


@dataclass
class DecodedHypothesis:
    tokens: tuple[str, ...]
    features: dict[str, float]
    score: float


def _orientation(prev_span: tuple[int, int], start: int, end: int) -> str:
    if start == prev_span[1]:
        return "monotone"
    if end == prev_span[0]:
        return "swap"
    return "discontinuous"


def _reo_logp(entry: LexReorderingEntry | None, which: str, orient: str) -> float:
    if entry is None:
        return OOV_FLOOR_LOG10
    triple = entry.prev if which == "prev" else entry.next
    return math.log10(max(triple[("monotone", "swap", "discontinuous").index(orient)], _TINY))


def _future_table(
    source: Sentence,
    options: list[PhraseOption],
    model: lm_mod.NGramModel,
    weights: dict[str, float],
) -> list[list[float]]:
    n = len(source)
    unigram = {}
    best = [[-math.inf] * (n + 1) for _ in range(n + 1)]
    for opt in options:
        local = sum(weights[name] * val for name, val in opt.scores)
        local += weights["phrase_penalty"] * -1.0
        local += weights["word_penalty"] * -float(len(opt.tgt))
        lm_est = 0.0
        for w in opt.tgt:
            if w not in unigram:
                unigram[w] = model.conditional((), w)
            lm_est += unigram[w]
        local += weights["lm"] * lm_est
        if local > best[opt.start][opt.end]:
            best[opt.start][opt.end] = local
    for width in range(2, n + 1):
        for i in range(n - width + 1):
            j = i + width
            for k in range(i + 1, j):
                combined = best[i][k] + best[k][j]
                if combined > best[i][j]:
                    best[i][j] = combined
    return best


def _gap_future(coverage: int, n: int, fc: list[list[float]]) -> float:
    total = 0.0
    i = 0
    while i < n:
        if coverage >> i & 1:
            i += 1
            continue
        j = i
        while j < n and not (coverage >> j & 1):
            j += 1
        total += fc[i][j]
        i = j
    return total


def _search(
    source: Sentence,
    table: PhraseTable,
    reo_table: dict | None,
    model: lm_mod.NGramModel,
    weights: dict[str, float],
    config: DecoderConfig,
    keep_per_state: int,
) -> list[Hyp]:
    """Shared stack search; returns finalized complete hypotheses."""
    use_reo = config.use_lex_reordering
    validate_weights(weights, use_reo)
    n = len(source)
    names = feature_names(use_reo)

    def finalize(hyp: Hyp) -> Hyp:
        feats = dict(hyp.features)
        delta = 0.0
        lp = model.conditional(hyp.lm_ctx, lm_mod.EOS)
        feats["lm"] += lp
        delta += weights["lm"] * lp
        if use_reo and hyp.last_opt is not None:
            orient = _orientation(hyp.last_span, n, n)
            fname = f"reo_next_{orient}"
            val = _reo_logp(hyp.last_opt.reo, "next", orient)
            feats[fname] += val
            delta += weights[fname] * val
        return Hyp(hyp.score + delta, feats, hyp.coverage, hyp.last_span,
                   hyp.lm_ctx, hyp.tokens, hyp.last_opt)

    initial = Hyp(0.0, {name: 0.0 for name in names}, 0, (0, 0), (lm_mod.BOS,), ())
    if n == 0:
        return [finalize(initial)]

    options = build_options(source, table, reo_table, config)
    fc = _future_table(source, options, model, weights)
    full = (1 << n) - 1
    stacks: list[dict] = [{} for _ in range(n + 1)]
    stacks[0][(0, (0, 0), initial.lm_ctx, None)] = [initial]

    def insert(stack: dict, state, hyp: Hyp) -> None:
        bucket = stack.setdefault(state, [])
        for k, old in enumerate(bucket):
            if old.tokens == hyp.tokens:
                if hyp.score > old.score:
                    bucket[k] = hyp
                return
        bucket.append(hyp)
        bucket.sort(key=lambda h: (-h.score, h.tokens))
        del bucket[keep_per_state:]

    for covered in range(n):
        stack = stacks[covered]
        hyps = [h for bucket in stack.values() for h in bucket]
        future = {}
        for h in hyps:
            if h.coverage not in future:
                future[h.coverage] = _gap_future(h.coverage, n, fc)
        hyps.sort(key=lambda h: h.sort_key(future[h.coverage]))
        for hyp in hyps[: config.beam_size]:
            prev_end = hyp.last_span[1] - 1
            for opt in options:
                mask = ((1 << (opt.end - opt.start)) - 1) << opt.start
                if hyp.coverage & mask:
                    continue
                d = distortion_cost(prev_end, opt.start)
                if config.distortion_limit is not None and d > config.distortion_limit:
                    continue
                feats = dict(hyp.features)
                delta = 0.0
                for name, val in opt.scores:
                    feats[name] += val
                    delta += weights[name] * val
                feats["phrase_penalty"] += -1.0
                delta += weights["phrase_penalty"] * -1.0
                feats["word_penalty"] += -float(len(opt.tgt))
                delta += weights["word_penalty"] * -float(len(opt.tgt))
                feats["distortion"] += -float(d)
                delta += weights["distortion"] * -float(d)
                ctx = hyp.lm_ctx
                for w in opt.tgt:
                    ctx, lp = model.step(ctx, w)
                    feats["lm"] += lp
                    delta += weights["lm"] * lp
                if use_reo:
                    orient = _orientation(hyp.last_span, opt.start, opt.end)
                    fname = f"reo_prev_{orient}"
                    val = _reo_logp(opt.reo, "prev", orient)
                    feats[fname] += val
                    delta += weights[fname] * val
                    if hyp.last_opt is not None:
                        fname = f"reo_next_{orient}"
                        val = _reo_logp(hyp.last_opt.reo, "next", orient)
                        feats[fname] += val
                        delta += weights[fname] * val
                new = Hyp(
                    hyp.score + delta,
                    feats,
                    hyp.coverage | mask,
                    (opt.start, opt.end),
                    ctx,
                    hyp.tokens + opt.tgt,
                    opt,
                )
                if new.coverage == full:
                    new = finalize(new)
                state = (
                    new.coverage,
                    new.last_span,
                    new.lm_ctx,
                    opt.index if use_reo else None,
                )
                insert(stacks[opt.end - opt.start + covered], state, new)

    return [h for bucket in stacks[n].values() for h in bucket]


def decode(
    source: Sentence,
    table: PhraseTable,
    reo_table: dict | None,
    model: lm_mod.NGramModel,
    weights: dict[str, float],
    config: DecoderConfig,
) -> DecodedHypothesis:
    """Best complete hypothesis; OOV tokens copy through at floor scores."""
    complete = _search(source, table, reo_table, model, weights, config, 1)
    best = min(complete, key=lambda h: (-h.score, h.tokens))
    return DecodedHypothesis(best.tokens, best.features, best.score)


def nbest(
    source: Sentence,
    table: PhraseTable,
    reo_table: dict | None,
    model: lm_mod.NGramModel,
    weights: dict[str, float],
    config: DecoderConfig,
) -> list[DecodedHypothesis]:
    """Up to nbest_size distinct-string candidates, best first."""
    complete = _search(
        source, table, reo_table, model, weights, config, config.nbest_size
    )
    complete.sort(key=lambda h: (-h.score, h.tokens))
    out: list[DecodedHypothesis] = []
    seen = set()
    for h in complete:
        if h.tokens in seen:
            continue
        seen.add(h.tokens)
        out.append(DecodedHypothesis(h.tokens, h.features, h.score))
        if len(out) == config.nbest_size:
            break
    return out


def write_nbest(path: str, lists: list[list[DecodedHypothesis]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for sid, cands in enumerate(lists):
            for cand in cands:
                feats = " ".join(
                    f"{name}:{cand.features[name]!r}" for name in sorted(cand.features)
                )
                fh.write(
                    f"{sid} ||| {' '.join(cand.tokens)} ||| {feats} ||| "
                    f"{cand.score!r}\n"
                )


def read_nbest(path: str) -> dict[int, list[DecodedHypothesis]]:
    out: dict[int, list[DecodedHypothesis]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(" ||| ")
            if len(parts) != 4:
                raise DataError(f"{path}:{lineno}: expected 4 ||| fields")
            feats = {}
            for item in parts[2].split():
                name, _, val = item.rpartition(":")
                feats[name] = float(val)
            out.setdefault(int(parts[0]), []).append(
                DecodedHypothesis(tuple(parts[1].split()), feats, float(parts[3]))
            )
    return out
