"""Word alignment: IBM Model 1 EM training, Viterbi linking, grow-diag-final-and.

The lexicon holds w(src_word | tgt_word) with a virtual <null> target
token, the quantity the phrase-scoring lexical weights consume.  Training
is classic Model 1 expectation maximization: every source token of a pair
distributes posterior mass over the target tokens plus <null>, and the
M-step renormalizes per target token.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

from .corpus import Sentence
from .errors import AlignmentError, DataError, TrainingError

NULL_TOKEN = "<null>"


@dataclass
class Lexicon:
    probs: dict[tuple[str, str], float] = field(default_factory=dict)
    log_likelihoods: list[float] = field(default_factory=list)

    def prob(self, src: str, tgt: str) -> float:
        return self.probs.get((src, tgt), 0.0)

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for (s, t), p in sorted(self.probs.items()):
                fh.write(f"{s} {t} {p!r}\n")

    @classmethod
    def load(cls, path: str) -> "Lexicon":
        probs = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                parts = line.split()
                if len(parts) != 3:
                    raise DataError(f"{path}:{lineno}: expected 'src tgt prob'")
                probs[(parts[0], parts[1])] = float(parts[2])
        return cls(probs)


@dataclass(frozen=True)
class AlignmentMatrix:
    links: frozenset[tuple[int, int]]
    src_len: int
    tgt_len: int

    def __post_init__(self) -> None:
        for i, j in self.links:
            if not (0 <= i < self.src_len and 0 <= j < self.tgt_len):
                raise AlignmentError(
                    f"link ({i},{j}) out of bounds for {self.src_len}x{self.tgt_len}"
                )

    def transpose(self) -> "AlignmentMatrix":
        return AlignmentMatrix(
            frozenset((j, i) for i, j in self.links), self.tgt_len, self.src_len
        )

    def to_pharaoh(self) -> str:
        return " ".join(f"{i}-{j}" for i, j in sorted(self.links))


def parse_pharaoh(line: str, src_len: int, tgt_len: int) -> AlignmentMatrix:
    links = set()
    for part in line.split():
        i, j = part.split("-")
        links.add((int(i), int(j)))
    return AlignmentMatrix(frozenset(links), src_len, tgt_len)


def write_alignments(path: str, alignments: list[AlignmentMatrix]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for a in alignments:
            fh.write(a.to_pharaoh() + "\n")


def read_alignments(
    path: str, pairs: list[tuple[Sentence, Sentence]]
) -> list[AlignmentMatrix]:
    with open(path, encoding="utf-8") as fh:
        lines = [line.strip() for line in fh]
    if len(lines) != len(pairs):
        raise DataError(
            f"{path}: {len(lines)} alignment lines for {len(pairs)} sentence pairs"
        )
    return [
        parse_pharaoh(line, len(src), len(tgt))
        for line, (src, tgt) in zip(lines, pairs)
    ]


def train_ibm1(bitext: list[tuple[Sentence, Sentence]], iterations: int = 5) -> Lexicon:
    """Run Model 1 EM and return w(s|t) with per-iteration log-likelihoods.

    Starts uniform, accumulates expected counts in corpus order, and
    reports the corpus log-likelihood (natural log, including the uniform
    1/(m+1) alignment prior) before each reestimation, so the sequence is
    non-decreasing.
    """
    if iterations < 1:
        raise TrainingError("iterations must be >= 1")
    if not bitext:
        raise TrainingError("empty bitext")
    for src, tgt in bitext:
        if not src or not tgt:
            raise TrainingError("bitext contains an empty sentence")
    src_vocab = {s for src, _ in bitext for s in src}
    uniform = 1.0 / len(src_vocab)
    probs: dict[tuple[str, str], float] = {}
    lls = []
    for _ in range(iterations):
        counts: dict[tuple[str, str], float] = defaultdict(float)
        totals: dict[str, float] = defaultdict(float)
        ll = 0.0
        for src, tgt in bitext:
            targets = (NULL_TOKEN,) + tgt
            for s in src:
                weights = [probs.get((s, t), uniform) for t in targets]
                denom = sum(weights)
                ll += math.log(denom / len(targets))
                for t, w in zip(targets, weights):
                    p = w / denom
                    counts[(s, t)] += p
                    totals[t] += p
        lls.append(ll)
        probs = {(s, t): c / totals[t] for (s, t), c in counts.items()}
    return Lexicon(probs, lls)


def viterbi_align(
    pair: tuple[Sentence, Sentence], lexicon: Lexicon
) -> AlignmentMatrix:
    """Link each source token to its best target token, <null> links omitted.

    The virtual <null> occupies position 0, so ties (including all-zero
    rows from unknown tokens) resolve toward <null> first, then the
    smallest target index.
    """
    src, tgt = pair
    links = set()
    for i, s in enumerate(src):
        best_j, best_p = -1, lexicon.prob(s, NULL_TOKEN)
        for j, t in enumerate(tgt):
            p = lexicon.prob(s, t)
            if p > best_p:
                best_j, best_p = j, p
        if best_j >= 0:
            links.add((i, best_j))
    return AlignmentMatrix(frozenset(links), len(src), len(tgt))


_NEIGHBORS = ((-1, 0), (0, -1), (1, 0), (0, 1), (-1, -1), (-1, 1), (1, -1), (1, 1))


def symmetrize_gdfa(
    forward: AlignmentMatrix, reverse: AlignmentMatrix
) -> AlignmentMatrix:
    """Grow-diag-final-and symmetrization of two directional alignments.

    Both arguments describe the same sentence pair (reverse already
    transposed).  Starts from the intersection, grows with union links in
    the 8-neighborhood of existing links whenever either endpoint is still
    unaligned (row-major scan, repeated to fixpoint), then final-and adds
    union links whose endpoints are both unaligned, forward links first.
    """
    if (forward.src_len, forward.tgt_len) != (reverse.src_len, reverse.tgt_len):
        raise AlignmentError(
            f"dimension mismatch: {forward.src_len}x{forward.tgt_len} vs "
            f"{reverse.src_len}x{reverse.tgt_len}"
        )
    union = forward.links | reverse.links
    aligned = set(forward.links & reverse.links)
    src_done = {i for i, _ in aligned}
    tgt_done = {j for _, j in aligned}

    def add(i: int, j: int) -> None:
        aligned.add((i, j))
        src_done.add(i)
        tgt_done.add(j)

    changed = True
    while changed:
        changed = False
        for i in range(forward.src_len):
            for j in range(forward.tgt_len):
                if (i, j) not in aligned:
                    continue
                for di, dj in _NEIGHBORS:
                    ni, nj = i + di, j + dj
                    if (ni, nj) in union and (ni, nj) not in aligned:
                        if ni not in src_done or nj not in tgt_done:
                            add(ni, nj)
                            changed = True
    for direction in (forward.links, reverse.links):
        for i, j in sorted(direction):
            if i not in src_done and j not in tgt_done:
                add(i, j)
    return AlignmentMatrix(frozenset(aligned), forward.src_len, forward.tgt_len)


def align_corpus(
    bitext: list[tuple[Sentence, Sentence]], iterations: int = 5
) -> tuple[list[AlignmentMatrix], Lexicon, Lexicon]:
    """Train both directions, Viterbi-align, and symmetrize each pair.

    Returns (symmetrized alignments, forward lexicon w(s|t), reverse
    lexicon w(t|s)).
    """
    lex_fwd = train_ibm1(bitext, iterations)
    lex_rev = train_ibm1([(t, s) for s, t in bitext], iterations)
    out = []
    for src, tgt in bitext:
        fwd = viterbi_align((src, tgt), lex_fwd)
        rev = viterbi_align((tgt, src), lex_rev).transpose()
        out.append(symmetrize_gdfa(fwd, rev))
    return out, lex_fwd, lex_rev
