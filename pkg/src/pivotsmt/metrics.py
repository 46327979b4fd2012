"""Translation quality metrics: BLEU, MBR selection, paired bootstrap, RQuantity.

Corpus BLEU is the standard clipped 4-gram precision geometric mean with
brevity penalty, single reference.  Sentence BLEU adds one to numerator
and denominator of orders 2-4 so the MBR loss stays defined on short
hypotheses.  RQuantity measures reordering as the normalized span mass of
swapped adjacent consistent block pairs, extracted by a leftmost-first
recursive binary decomposition of the alignment.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .align import AlignmentMatrix
from .corpus import Sentence
from .errors import CombinationError, EvaluationError

MAX_ORDER = 4


@dataclass
class BleuStats:
    clipped: tuple[int, ...] = (0,) * MAX_ORDER
    totals: tuple[int, ...] = (0,) * MAX_ORDER
    hyp_len: int = 0
    ref_len: int = 0

    def __add__(self, other: "BleuStats") -> "BleuStats":
        return BleuStats(
            tuple(a + b for a, b in zip(self.clipped, other.clipped)),
            tuple(a + b for a, b in zip(self.totals, other.totals)),
            self.hyp_len + other.hyp_len,
            self.ref_len + other.ref_len,
        )


@dataclass
class BleuReport:
    bleu: float
    precisions: tuple[float, ...]
    brevity_penalty: float
    hyp_len: int
    ref_len: int

    def summary(self) -> str:
        pcts = "/".join(f"{100 * p:.1f}" for p in self.precisions)
        ratio = self.hyp_len / self.ref_len if self.ref_len else 0.0
        return (
            f"BLEU={self.bleu:.6f} {pcts} BP={self.brevity_penalty:.4f} "
            f"ratio={ratio:.4f} hyp_len={self.hyp_len} ref_len={self.ref_len}"
        )


def _ngrams(sent: Sentence, n: int) -> Counter:
    return Counter(tuple(sent[i: i + n]) for i in range(len(sent) - n + 1))


def sentence_stats(hyp: Sentence, ref: Sentence) -> BleuStats:
    clipped, totals = [], []
    for n in range(1, MAX_ORDER + 1):
        hyp_ngrams = _ngrams(hyp, n)
        ref_ngrams = _ngrams(ref, n)
        clipped.append(
            sum(min(c, ref_ngrams[g]) for g, c in hyp_ngrams.items())
        )
        totals.append(sum(hyp_ngrams.values()))
    return BleuStats(tuple(clipped), tuple(totals), len(hyp), len(ref))


def _brevity_penalty(hyp_len: int, ref_len: int) -> float:
    if hyp_len == 0:
        return 0.0
    if hyp_len < ref_len:
        return math.exp(1.0 - ref_len / hyp_len)
    return 1.0


def bleu_from_stats(stats: BleuStats) -> BleuReport:
    precisions = tuple(
        (c / t if t else 0.0) for c, t in zip(stats.clipped, stats.totals)
    )
    bp = _brevity_penalty(stats.hyp_len, stats.ref_len)
    if any(p == 0.0 for p in precisions):
        score = 0.0
    else:
        score = bp * math.exp(sum(math.log(p) for p in precisions) / MAX_ORDER)
    return BleuReport(score, precisions, bp, stats.hyp_len, stats.ref_len)


def bleu_corpus(hyps: list[Sentence], refs: list[Sentence]) -> BleuReport:
    if len(hyps) != len(refs) or not hyps:
        raise EvaluationError(
            f"hypothesis/reference length mismatch: {len(hyps)} vs {len(refs)}"
        )
    total = BleuStats()
    for hyp, ref in zip(hyps, refs):
        total = total + sentence_stats(hyp, ref)
    return bleu_from_stats(total)


def bleu_sentence(hyp: Sentence, ref: Sentence) -> float:
    """Smoothed sentence-level BLEU: add-one on orders 2-4."""
    stats = sentence_stats(hyp, ref)
    precisions = []
    for n in range(MAX_ORDER):
        c, t = stats.clipped[n], stats.totals[n]
        if n > 0:
            c, t = c + 1, t + 1
        precisions.append(c / t if t else 0.0)
    if any(p == 0.0 for p in precisions):
        return 0.0
    bp = _brevity_penalty(stats.hyp_len, stats.ref_len)
    return bp * math.exp(sum(math.log(p) for p in precisions) / MAX_ORDER)


def mbr_combine(
    candidates: list[Sentence], posterior: list[float] | None = None
) -> Sentence:
    """Pick the candidate with minimal expected 1-BLEU loss against the rest.

    Requires at least 3 candidates: with only two, the loss degenerates to
    a length comparison.  Ties resolve to the earliest candidate.
    """
    if len(candidates) < 3:
        raise CombinationError(
            f"MBR combination needs at least 3 hypotheses per sentence, "
            f"got {len(candidates)}"
        )
    if posterior is None:
        weights = [1.0] * len(candidates)
    else:
        if len(posterior) != len(candidates):
            raise CombinationError("posterior length does not match candidates")
        if any(w < 0 for w in posterior):
            raise CombinationError("posterior weights must be non-negative")
        weights = list(posterior)
    best_idx, best_loss = 0, None
    for i, cand in enumerate(candidates):
        loss = sum(
            (1.0 - bleu_sentence(cand, other)) * w
            for j, (other, w) in enumerate(zip(candidates, weights))
            if j != i
        )
        if best_loss is None or loss < best_loss - 1e-12:
            best_idx, best_loss = i, loss
    return candidates[best_idx]


def mbr_corpus(
    lists: list[list[Sentence]], posterior: list[float] | None = None
) -> list[Sentence]:
    return [mbr_combine(cands, posterior) for cands in lists]


@dataclass
class SignificanceVerdict:
    wins_a: int
    wins_b: int
    ties: int
    confident_winner: str  # "A", "B" or "none"
    bleu_a: float
    bleu_b: float

    def summary(self) -> str:
        return (
            f"wins_A={self.wins_a} wins_B={self.wins_b} ties={self.ties} "
            f"winner={self.confident_winner} "
            f"BLEU_A={self.bleu_a:.6f} BLEU_B={self.bleu_b:.6f}"
        )


def bootstrap_significance(
    hyps_a: list[Sentence],
    hyps_b: list[Sentence],
    refs: list[Sentence],
    samples: int = 1000,
    level: float = 0.99,
    seed: int = 1234,
) -> SignificanceVerdict:
    """Pair bootstrap resampling over sentence indices.

    Each resample i draws len(refs) indices with replacement from a
    PCG64 generator seeded with SeedSequence([seed, i]), applies them to
    both systems and the references, and compares corpus BLEU.  A system
    winning at least `level` of the resamples is the confident winner.
    """
    if not (len(hyps_a) == len(hyps_b) == len(refs)) or not refs:
        raise EvaluationError(
            f"length mismatch: A={len(hyps_a)} B={len(hyps_b)} refs={len(refs)}"
        )
    if samples < 1:
        raise EvaluationError("samples must be >= 1")
    stats_a = [sentence_stats(h, r) for h, r in zip(hyps_a, refs)]
    stats_b = [sentence_stats(h, r) for h, r in zip(hyps_b, refs)]
    n = len(refs)
    wins_a = wins_b = ties = 0
    for i in range(samples):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, i])))
        idx = rng.integers(0, n, size=n)
        sample_a = BleuStats()
        sample_b = BleuStats()
        for k in idx:
            sample_a = sample_a + stats_a[k]
            sample_b = sample_b + stats_b[k]
        score_a = bleu_from_stats(sample_a).bleu
        score_b = bleu_from_stats(sample_b).bleu
        if score_a > score_b:
            wins_a += 1
        elif score_b > score_a:
            wins_b += 1
        else:
            ties += 1
    winner = "none"
    if wins_a >= level * samples:
        winner = "A"
    elif wins_b >= level * samples:
        winner = "B"
    return SignificanceVerdict(
        wins_a,
        wins_b,
        ties,
        winner,
        bleu_corpus(hyps_a, refs).bleu,
        bleu_corpus(hyps_b, refs).bleu,
    )


@dataclass
class ReorderingSet:
    reorderings: list[tuple[tuple[int, int], tuple[int, int]]]  # (A span, B span)
    source_length: int

    @property
    def score(self) -> float:
        if self.source_length == 0:
            return 0.0
        return sum(
            (a2 - a1 + 1) + (b2 - b1 + 1)
            for (a1, a2), (b1, b2) in self.reorderings
        ) / self.source_length


def _consistent(
    links: frozenset[tuple[int, int]], lo: int, hi: int
) -> tuple[bool, int]:
    """Is source span [lo, hi] a consistent block? Returns (ok, min target)."""
    inside = [j for i, j in links if lo <= i <= hi]
    if not inside:
        return False, -1
    j1, j2 = min(inside), max(inside)
    if any(j1 <= j <= j2 and not (lo <= i <= hi) for i, j in links):
        return False, -1
    return True, j1


def extract_reorderings(alignment: AlignmentMatrix) -> ReorderingSet:
    """Swapped adjacent block pairs via leftmost-split binary decomposition.

    A span splits at the smallest point where both halves are consistent
    blocks; a split directly before an unaligned source word is forbidden
    (unaligned words belong to their left neighbour's block, or the right
    neighbour at position 0).  Each inverted node contributes the source
    sizes of both halves.
    """
    links = alignment.links
    aligned = {i for i, _ in links}
    found: list[tuple[tuple[int, int], tuple[int, int]]] = []

    def decompose(lo: int, hi: int) -> None:
        if lo >= hi or not any(lo <= i <= hi for i in aligned):
            return
        for m in range(lo, hi):
            if (m + 1) not in aligned:
                continue
            left_ok, left_j = _consistent(links, lo, m)
            right_ok, right_j = _consistent(links, m + 1, hi)
            if left_ok and right_ok:
                if left_j > right_j:
                    found.append(((lo, m), (m + 1, hi)))
                decompose(lo, m)
                decompose(m + 1, hi)
                return

    if links:
        decompose(0, alignment.src_len - 1)
    return ReorderingSet(found, alignment.src_len)


def rquantity(
    pairs: list[AlignmentMatrix],
) -> tuple[float, list[ReorderingSet]]:
    """Mean per-sentence reordering score and the per-sentence block pairs."""
    if not pairs:
        raise EvaluationError("no alignments given")
    sets = [extract_reorderings(a) for a in pairs]
    return sum(s.score for s in sets) / len(sets), sets
