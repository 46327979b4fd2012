"""Phrase extraction and translation-model estimation.

Extraction keeps tight spans only: a phrase pair is a rectangular block of
the alignment whose source and target boundaries coincide with the
outermost links of the block, with no link leaving the block partially.
Scores are relative frequencies over extracted occurrences plus
Koehn-style lexical weights; the lexicalized reordering model classifies
each occurrence as monotone / swap / discontinuous against its
target-adjacent neighbours via boundary link checks.
"""

from __future__ import annotations

import warnings
from collections import defaultdict
from dataclasses import dataclass, field

from .align import NULL_TOKEN, AlignmentMatrix, Lexicon
from .corpus import Sentence
from .errors import DataError, ExtractionError

LEX_FLOOR = 1e-7  # for lexicon entries never seen in training
REO_SMOOTH = 0.5  # add-sigma smoothing of orientation counts

Phrase = tuple[str, ...]


@dataclass(frozen=True)
class PhraseOccurrence:
    src: Phrase
    tgt: Phrase
    src_span: tuple[int, int]  # inclusive
    tgt_span: tuple[int, int]
    links: frozenset[tuple[int, int]]  # phrase-local indices


@dataclass
class PhraseEntry:
    p_s_given_t: float
    p_t_given_s: float
    lex_s_given_t: float
    lex_t_given_s: float
    joint_count: int = 0
    src_count: int = 0
    tgt_count: int = 0


@dataclass
class PhraseTable:
    entries: dict[Phrase, dict[Phrase, PhraseEntry]] = field(
        default_factory=lambda: defaultdict(dict)
    )

    def options(self, src: Phrase) -> list[tuple[Phrase, PhraseEntry]]:
        return sorted(self.entries.get(src, {}).items())

    def __contains__(self, src: Phrase) -> bool:
        return src in self.entries

    def __len__(self) -> int:
        return sum(len(tgts) for tgts in self.entries.values())

    def iter_pairs(self):
        for src in sorted(self.entries):
            for tgt in sorted(self.entries[src]):
                yield src, tgt, self.entries[src][tgt]

    def invert(self) -> "PhraseTable":
        out = PhraseTable()
        for src, tgt, e in self.iter_pairs():
            out.entries[tgt][src] = PhraseEntry(
                p_s_given_t=e.p_t_given_s,
                p_t_given_s=e.p_s_given_t,
                lex_s_given_t=e.lex_t_given_s,
                lex_t_given_s=e.lex_s_given_t,
                joint_count=e.joint_count,
                src_count=e.tgt_count,
                tgt_count=e.src_count,
            )
        return out

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for src, tgt, e in self.iter_pairs():
                fh.write(
                    f"{' '.join(src)} ||| {' '.join(tgt)} ||| "
                    f"{e.p_s_given_t!r} {e.lex_s_given_t!r} "
                    f"{e.p_t_given_s!r} {e.lex_t_given_s!r} ||| "
                    f"{e.joint_count} {e.src_count} {e.tgt_count}\n"
                )

    @classmethod
    def load(cls, path: str) -> "PhraseTable":
        table = cls()
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split(" ||| ")
                if len(parts) != 4:
                    raise DataError(f"{path}:{lineno}: expected 4 ||| fields")
                src = tuple(parts[0].split())
                tgt = tuple(parts[1].split())
                scores = [float(x) for x in parts[2].split()]
                counts = [int(x) for x in parts[3].split()]
                if len(scores) != 4 or len(counts) != 3:
                    raise DataError(f"{path}:{lineno}: bad score/count arity")
                table.entries[src][tgt] = PhraseEntry(
                    p_s_given_t=scores[0],
                    lex_s_given_t=scores[1],
                    p_t_given_s=scores[2],
                    lex_t_given_s=scores[3],
                    joint_count=counts[0],
                    src_count=counts[1],
                    tgt_count=counts[2],
                )
        return table


def extract_phrases(
    pair: tuple[Sentence, Sentence],
    alignment: AlignmentMatrix,
    max_len: int = 10,
) -> list[PhraseOccurrence]:
    """All tight consistent phrase pairs of one aligned sentence pair."""
    src, tgt = pair
    if (alignment.src_len, alignment.tgt_len) != (len(src), len(tgt)):
        raise ExtractionError(
            f"alignment is {alignment.src_len}x{alignment.tgt_len} "
            f"but pair is {len(src)}x{len(tgt)}"
        )
    links = sorted(alignment.links)
    out = []
    for i1 in range(len(src)):
        for i2 in range(i1, min(i1 + max_len, len(src))):
            inside = [(i, j) for i, j in links if i1 <= i <= i2]
            if not inside:
                continue
            if min(i for i, _ in inside) != i1 or max(i for i, _ in inside) != i2:
                continue  # source boundary word unaligned: not tight
            j1 = min(j for _, j in inside)
            j2 = max(j for _, j in inside)
            if j2 - j1 + 1 > max_len:
                continue
            if any(j1 <= j <= j2 and not (i1 <= i <= i2) for i, j in links):
                continue  # a target word inside links outside the block
            out.append(
                PhraseOccurrence(
                    src=src[i1: i2 + 1],
                    tgt=tgt[j1: j2 + 1],
                    src_span=(i1, i2),
                    tgt_span=(j1, j2),
                    links=frozenset((i - i1, j - j1) for i, j in inside),
                )
            )
    return out


def lexical_weight(
    src: Phrase,
    tgt: Phrase,
    links: frozenset[tuple[int, int]],
    lexicon: Lexicon,
) -> float:
    """Product over source positions of the averaged linked w(s|t).

    Unlinked source positions fall back to w(s|<null>); lexicon gaps
    contribute the LEX_FLOOR probability.
    """
    weight = 1.0
    for i, s in enumerate(src):
        linked = [j for x, j in links if x == i]
        if linked:
            total = sum(lexicon.prob(s, tgt[j]) or LEX_FLOOR for j in linked)
            weight *= total / len(linked)
        else:
            weight *= lexicon.prob(s, NULL_TOKEN) or LEX_FLOOR
    return weight


def build_phrase_table(
    bitext: list[tuple[Sentence, Sentence]],
    alignments: list[AlignmentMatrix],
    lex_fwd: Lexicon,
    lex_rev: Lexicon,
    max_len: int = 10,
) -> PhraseTable:
    """Count extracted phrase pairs and estimate all four scores.

    lex_fwd holds w(src_word|tgt_word), lex_rev the opposite direction.
    Each phrase pair's lexical weight uses, independently per direction,
    the occurrence alignment that maximizes it.
    """
    if len(bitext) != len(alignments):
        raise ExtractionError(
            f"{len(bitext)} sentence pairs but {len(alignments)} alignments"
        )
    joint: dict[tuple[Phrase, Phrase], int] = defaultdict(int)
    link_sets: dict[tuple[Phrase, Phrase], set] = defaultdict(set)
    for pair, alignment in zip(bitext, alignments):
        for occ in extract_phrases(pair, alignment, max_len):
            joint[(occ.src, occ.tgt)] += 1
            link_sets[(occ.src, occ.tgt)].add(occ.links)
    if not joint:
        warnings.warn("no phrase pairs extracted (no alignment links?)")
        return PhraseTable()
    src_count: dict[Phrase, int] = defaultdict(int)
    tgt_count: dict[Phrase, int] = defaultdict(int)
    for (s, t), n in joint.items():
        src_count[s] += n
        tgt_count[t] += n
    table = PhraseTable()
    for (s, t), n in joint.items():
        variants = sorted(link_sets[(s, t)])
        table.entries[s][t] = PhraseEntry(
            p_s_given_t=n / tgt_count[t],
            p_t_given_s=n / src_count[s],
            lex_s_given_t=max(lexical_weight(s, t, lk, lex_fwd) for lk in variants),
            lex_t_given_s=max(
                lexical_weight(t, s, frozenset((j, i) for i, j in lk), lex_rev)
                for lk in variants
            ),
            joint_count=n,
            src_count=src_count[s],
            tgt_count=tgt_count[t],
        )
    return table


ORIENTATIONS = ("monotone", "swap", "discontinuous")


@dataclass
class LexReorderingEntry:
    prev: tuple[float, float, float]  # monotone, swap, discontinuous
    next: tuple[float, float, float]


def classify_orientation(
    alignment: AlignmentMatrix, src_span: tuple[int, int], tgt_span: tuple[int, int]
) -> tuple[str, str]:
    """Word-based (with-previous, with-next) orientation of one occurrence."""
    i1, i2 = src_span
    j1, j2 = tgt_span
    links = alignment.links

    def prev_orient() -> str:
        if (i1 - 1, j1 - 1) in links:
            return "monotone"
        if (i2 + 1, j1 - 1) in links:
            return "swap"
        return "discontinuous"

    def next_orient() -> str:
        if (i2 + 1, j2 + 1) in links:
            return "monotone"
        if (i1 - 1, j2 + 1) in links:
            return "swap"
        return "discontinuous"

    return prev_orient(), next_orient()


def estimate_lex_reordering(
    bitext: list[tuple[Sentence, Sentence]],
    alignments: list[AlignmentMatrix],
    max_len: int = 10,
) -> dict[tuple[Phrase, Phrase], LexReorderingEntry]:
    """Relative-frequency orientation model with add-sigma smoothing."""
    if len(bitext) != len(alignments):
        raise ExtractionError(
            f"{len(bitext)} sentence pairs but {len(alignments)} alignments"
        )
    counts: dict[tuple[Phrase, Phrase], list[list[float]]] = {}
    for pair, alignment in zip(bitext, alignments):
        for occ in extract_phrases(pair, alignment, max_len):
            po, no = classify_orientation(alignment, occ.src_span, occ.tgt_span)
            cell = counts.setdefault(
                (occ.src, occ.tgt), [[0.0] * 3 for _ in range(2)]
            )
            cell[0][ORIENTATIONS.index(po)] += 1
            cell[1][ORIENTATIONS.index(no)] += 1

    def smooth(row: list[float]) -> tuple[float, float, float]:
        total = sum(row) + 3 * REO_SMOOTH
        return tuple((c + REO_SMOOTH) / total for c in row)  # type: ignore

    return {
        pair: LexReorderingEntry(prev=smooth(cell[0]), next=smooth(cell[1]))
        for pair, cell in counts.items()
    }


def save_reordering(
    table: dict[tuple[Phrase, Phrase], LexReorderingEntry], path: str
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for (src, tgt) in sorted(table):
            e = table[(src, tgt)]
            nums = " ".join(repr(x) for x in (*e.prev, *e.next))
            fh.write(f"{' '.join(src)} ||| {' '.join(tgt)} ||| {nums}\n")


def load_reordering(path: str) -> dict[tuple[Phrase, Phrase], LexReorderingEntry]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(" ||| ")
            if len(parts) != 3:
                raise DataError(f"{path}:{lineno}: expected 3 ||| fields")
            nums = [float(x) for x in parts[2].split()]
            if len(nums) != 6:
                raise DataError(f"{path}:{lineno}: expected 6 probabilities")
            out[(tuple(parts[0].split()), tuple(parts[1].split()))] = (
                LexReorderingEntry(prev=tuple(nums[:3]), next=tuple(nums[3:]))
            )
    return out
