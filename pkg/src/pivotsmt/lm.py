"""Interpolated Kneser-Ney n-gram language model with ARPA text serialization.

One absolute discount per order, estimated as n1/(n1+2*n2) from the
count-of-count statistics of that order's adjusted counts (raw at the
highest order and for <s>-initial grams, continuation counts below).
The unigram level interpolates with a uniform distribution over the
prediction vocabulary, which is where the <unk> token gets its mass.
All stored values are log10, ARPA-style.
"""

from __future__ import annotations

import math
import warnings
from collections import Counter, defaultdict
from dataclasses import dataclass, field

from .corpus import Sentence
from .errors import DataError, TrainingError

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"

_DUMMY_LOGPROB = -99.0  # ARPA placeholder for context-only entries like <s>


@dataclass
class NGramModel:
    order: int
    probs: dict[tuple[str, ...], float] = field(default_factory=dict)
    backoffs: dict[tuple[str, ...], float] = field(default_factory=dict)
    vocab: frozenset[str] = frozenset()

    @property
    def predicted_vocab(self) -> list[str]:
        """Tokens the model can emit (excludes <s>)."""
        return sorted({g[0] for g in self.probs if len(g) == 1 and g[0] != BOS})

    def _map(self, token: str) -> str:
        if token in (BOS, EOS):
            return UNK
        return token if (token,) in self.probs else UNK

    def conditional(self, context: tuple[str, ...], word: str) -> float:
        """log10 p(word | context) with standard backoff chaining."""
        w = self._map(word) if word != EOS else EOS
        ctx = tuple(self._map(t) if t != BOS else BOS for t in context)
        ctx = ctx[max(0, len(ctx) - (self.order - 1)):] if self.order > 1 else ()
        acc = 0.0
        while True:
            gram = ctx + (w,)
            if gram in self.probs and self.probs[gram] != _DUMMY_LOGPROB:
                return acc + self.probs[gram]
            if not ctx:
                return acc + self.probs[(w,)]
            acc += self.backoffs.get(ctx, 0.0)
            ctx = ctx[1:]

    def step(
        self, context: tuple[str, ...], word: str
    ) -> tuple[tuple[str, ...], float]:
        """Score one word and return (next context, log10 prob)."""
        lp = self.conditional(context, word)
        if self.order > 1:
            ctx = (context + (self._map(word),))[-(self.order - 1):]
        else:
            ctx = ()
        return ctx, lp

    def logprob(self, sentence: Sentence) -> float:
        return logprob(self, sentence)

    def perplexity(self, corpus: list[Sentence]) -> float:
        return perplexity(self, corpus)


def train_kn(corpus: list[Sentence], order: int = 5) -> NGramModel:
    if order < 1:
        raise TrainingError("order must be >= 1")
    if not corpus:
        raise TrainingError("empty corpus")

    counts: list[Counter] = [Counter() for _ in range(order + 1)]
    for sent in corpus:
        seq = (BOS,) + tuple(sent) + (EOS,)
        for i in range(1, len(seq)):
            for m in range(1, min(order, i + 1) + 1):
                counts[m][seq[i - m + 1: i + 1]] += 1

    adjusted: list[dict] = [dict() for _ in range(order + 1)]
    adjusted[order] = dict(counts[order])
    for m in range(1, order):
        cont: Counter = Counter()
        for gram in counts[m + 1]:
            cont[gram[1:]] += 1
        adjusted[m] = {
            g: (counts[m][g] if g[0] == BOS else cont.get(g, 0))
            for g in counts[m]
        }

    discounts = [0.0] * (order + 1)
    for m in range(1, order + 1):
        n1 = sum(1 for c in adjusted[m].values() if c == 1)
        n2 = sum(1 for c in adjusted[m].values() if c == 2)
        if n1 == 0 or n2 == 0:
            if adjusted[m]:
                warnings.warn(
                    f"order {m}: degenerate count-of-counts (n1={n1}, n2={n2}), "
                    f"falling back to discount 0.5"
                )
            discounts[m] = 0.5
        else:
            discounts[m] = n1 / (n1 + 2 * n2)

    ctx_total: list[dict] = [defaultdict(float) for _ in range(order + 1)]
    ctx_types: list[dict] = [defaultdict(int) for _ in range(order + 1)]
    for m in range(1, order + 1):
        for gram, c in adjusted[m].items():
            ctx_total[m][gram[:-1]] += c
            ctx_types[m][gram[:-1]] += 1

    v_out = sorted({g[0] for g in counts[1]} | {EOS, UNK})
    base = 1.0 / len(v_out)

    probs: dict[tuple[str, ...], float] = {}
    backoffs: dict[tuple[str, ...], float] = {}

    def lower_prob(gram: tuple[str, ...]) -> float:
        """p(gram[-1] | gram[:-1]) from the already-built lower orders."""
        ctx, w = gram[:-1], gram[-1]
        acc = 1.0
        while True:
            g = ctx + (w,)
            if g in probs and probs[g] != _DUMMY_LOGPROB:
                return acc * 10 ** probs[g]
            if not ctx:
                return acc * 10 ** probs[(w,)]
            acc *= 10 ** backoffs.get(ctx, 0.0)
            ctx = ctx[1:]

    d1, t1 = discounts[1], len(adjusted[1])
    denom1 = sum(adjusted[1].values())
    for w in v_out:
        c = adjusted[1].get((w,), 0)
        p = (max(c - d1, 0.0) + d1 * t1 * base) / denom1
        probs[(w,)] = math.log10(p)
    for m in range(2, order + 1):
        d = discounts[m]
        for gram, c in sorted(adjusted[m].items()):
            h = gram[:-1]
            p = (max(c - d, 0.0) + d * ctx_types[m][h] * lower_prob(gram[1:])) \
                / ctx_total[m][h]
            probs[gram] = math.log10(p)
        for h in ctx_total[m]:
            backoffs[h] = math.log10(d * ctx_types[m][h] / ctx_total[m][h])

    for h in list(backoffs):
        if h not in probs:
            probs[h] = _DUMMY_LOGPROB
    vocab = frozenset(v_out) | {BOS}
    return NGramModel(order=order, probs=probs, backoffs=backoffs, vocab=vocab)


def score_tokens(model: NGramModel, sentence: Sentence) -> list[tuple[str, float]]:
    """Per-token (token, log10 prob) breakdown, ending with the </s> step."""
    ctx: tuple[str, ...] = (BOS,)
    out = []
    for tok in sentence:
        ctx, lp = model.step(ctx, tok)
        out.append((tok, lp))
    out.append((EOS, model.conditional(ctx, EOS)))
    return out


def logprob(model: NGramModel, sentence: Sentence) -> float:
    """Total log10 probability of the sentence including the end transition."""
    return sum(lp for _, lp in score_tokens(model, sentence))


def perplexity(model: NGramModel, corpus: list[Sentence]) -> float:
    total_lp = 0.0
    predicted = 0
    for sent in corpus:
        total_lp += logprob(model, sent)
        predicted += len(sent) + 1  # end marker is a predicted token
    return 10 ** (-total_lp / predicted)


def uniform_unigram_model(tokens) -> NGramModel:
    """Order-1 model assigning 1/V to every vocabulary token (plus </s>, <unk>)."""
    v_out = sorted(set(tokens) | {EOS, UNK})
    p = math.log10(1.0 / len(v_out))
    return NGramModel(
        order=1,
        probs={(w,): p for w in v_out},
        backoffs={},
        vocab=frozenset(v_out) | {BOS},
    )


def write_arpa(model: NGramModel, path: str) -> None:
    by_order: dict[int, list] = defaultdict(list)
    for gram in model.probs:
        by_order[len(gram)].append(gram)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\\data\\\n")
        for m in range(1, model.order + 1):
            fh.write(f"ngram {m}={len(by_order.get(m, []))}\n")
        for m in range(1, model.order + 1):
            fh.write(f"\n\\{m}-grams:\n")
            for gram in sorted(by_order.get(m, [])):
                line = f"{model.probs[gram]!r}\t{' '.join(gram)}"
                if gram in model.backoffs:
                    line += f"\t{model.backoffs[gram]!r}"
                fh.write(line + "\n")
        fh.write("\n\\end\\\n")


def read_arpa(path: str) -> NGramModel:
    probs: dict[tuple[str, ...], float] = {}
    backoffs: dict[tuple[str, ...], float] = {}
    order = 0
    in_data = False
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            if line == "\\data\\":
                in_data = True
                continue
            if line == "\\end\\":
                break
            if in_data and line.startswith("ngram"):
                order = max(order, int(line.split("=")[0].split()[1]))
                continue
            if line.startswith("\\") and line.endswith("-grams:"):
                continue
            parts = line.split("\t")
            if len(parts) not in (2, 3):
                raise DataError(f"{path}:{lineno}: malformed ARPA line")
            gram = tuple(parts[1].split())
            probs[gram] = float(parts[0])
            if len(parts) == 3:
                backoffs[gram] = float(parts[2])
    if not probs:
        raise DataError(f"{path}: no n-gram entries found")
    vocab = frozenset(g[0] for g in probs if len(g) == 1) | {BOS}
    return NGramModel(order=order, probs=probs, backoffs=backoffs, vocab=vocab)
