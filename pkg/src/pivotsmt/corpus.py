"""Corpus ingestion: tokenization, length/ratio filtering, dev/test selection.

A Sentence is a tuple of token strings (no whitespace inside a token).  A
ParallelCorpus keeps one file-worth of line-aligned rows per language; on
disk each language lives in its own UTF-8 file, one sentence per line,
tokens separated by single spaces.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field

from .errors import ConfigError, DataError, SelectionError

Sentence = tuple[str, ...]

TOKENIZER_PROFILES = ("standard", "lowercase", "pretokenized")


def decode_line(raw: bytes) -> str:
    """Decode one raw line as UTF-8; report the byte offset on failure."""
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DataError(f"invalid UTF-8 at byte offset {exc.start}") from exc


def tokenize(raw_line: str | bytes, profile: str = "standard") -> Sentence:
    """Split a raw line into tokens.

    "standard" separates every punctuation/symbol character from adjacent
    letters, digits and combining marks; "lowercase" additionally
    lowercases; "pretokenized" only splits on whitespace.  Consecutive
    whitespace always collapses.  The rule set is idempotent on its own
    output.
    """
    if isinstance(raw_line, bytes):
        raw_line = decode_line(raw_line)
    if profile not in TOKENIZER_PROFILES:
        raise ConfigError(f"unknown tokenizer profile: {profile!r}")
    if profile == "pretokenized":
        return tuple(raw_line.split())
    if profile == "lowercase":
        raw_line = raw_line.lower()
    out: list[str] = []
    word: list[str] = []
    for ch in raw_line:
        group = unicodedata.category(ch)[0]
        if group in "LNM":  # letters, numbers, combining marks stay joined
            word.append(ch)
        else:
            if word:
                out.append("".join(word))
                word = []
            if group not in "ZC":  # separators/controls vanish, the rest split off
                out.append(ch)
    if word:
        out.append("".join(word))
    return tuple(out)


@dataclass
class ParallelCorpus:
    languages: tuple[str, ...]
    rows: list[tuple[Sentence, ...]] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.languages = tuple(self.languages)
        for row in self.rows:
            if len(row) != len(self.languages):
                raise DataError(
                    f"row has {len(row)} sides, expected {len(self.languages)}"
                )

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, lang: str) -> list[Sentence]:
        return [row[self.index(lang)] for row in self.rows]

    def index(self, lang: str) -> int:
        try:
            return self.languages.index(lang)
        except ValueError:
            raise ConfigError(f"language {lang!r} not in corpus {self.languages}")

    def project(self, langs: list[str] | tuple[str, ...]) -> "ParallelCorpus":
        idx = [self.index(lang) for lang in langs]
        return ParallelCorpus(
            tuple(langs), [tuple(row[i] for i in idx) for row in self.rows]
        )


@dataclass
class CorpusSplit:
    train: ParallelCorpus
    dev: ParallelCorpus
    test: ParallelCorpus


def read_corpus(paths: dict[str, str], profile: str = "pretokenized") -> ParallelCorpus:
    """Load one file per language; files must be line-aligned."""
    languages = tuple(paths)
    columns: list[list[Sentence]] = []
    for lang in languages:
        with open(paths[lang], "rb") as fh:
            try:
                columns.append([tokenize(line.rstrip(b"\r\n"), profile) for line in fh])
            except DataError as exc:
                raise DataError(f"{paths[lang]}: {exc}") from exc
    lengths = {lang: len(col) for lang, col in zip(languages, columns)}
    if len(set(lengths.values())) > 1:
        raise DataError(f"corpus files are not line-aligned: {lengths}")
    return ParallelCorpus(languages, list(zip(*columns)) if columns else [])


def write_corpus(corpus: ParallelCorpus, paths: dict[str, str]) -> None:
    for lang in corpus.languages:
        with open(paths[lang], "w", encoding="utf-8") as fh:
            for sent in corpus.column(lang):
                fh.write(" ".join(sent) + "\n")


def filter_corpus(
    corpus: ParallelCorpus,
    max_len: int = 100,
    max_ratio: float = 3.0,
    pivot_lang: str | None = None,
) -> ParallelCorpus:
    """Drop rows that are too long or too unbalanced against the pivot.

    A row goes if any side has more than max_len tokens, any side is
    empty, or the length ratio between the pivot side and any other side
    exceeds max_ratio in either direction.  Removal is row-wide.
    """
    if pivot_lang is None:
        pivot_lang = corpus.languages[-1]
    pivot_idx = corpus.index(pivot_lang)
    kept = []
    for row in corpus.rows:
        lens = [len(sent) for sent in row]
        if min(lens) == 0 or max(lens) > max_len:
            continue
        pivot_len = lens[pivot_idx]
        if any(
            max(n, pivot_len) > max_ratio * min(n, pivot_len)
            for i, n in enumerate(lens)
            if i != pivot_idx
        ):
            continue
        kept.append(row)
    return ParallelCorpus(corpus.languages, kept)


def select_dev_test(
    corpus: ParallelCorpus,
    lm,
    selection_lang: str,
    dev_size: int,
    test_size: int,
    pool_factor: int = 2,
) -> CorpusSplit:
    """Pick dev/test rows by high perplexity, then low OOV ratio.

    Candidates are rows whose sentence occurs exactly once in every
    language.  They are ranked by per-sentence perplexity of the
    selection-language side (descending, ties by row index); the top
    pool_factor * (dev_size + test_size) form a pool that is re-ranked by
    OOV-token ratio ascending (stable, so perplexity order breaks OOV
    ties).  First dev_size rows become dev, the next test_size test;
    everything else stays in train.
    """
    want = dev_size + test_size
    counts = [dict() for _ in corpus.languages]
    for row in corpus.rows:
        for i, sent in enumerate(row):
            counts[i][sent] = counts[i].get(sent, 0) + 1
    candidates = [
        r
        for r, row in enumerate(corpus.rows)
        if all(counts[i][sent] == 1 for i, sent in enumerate(row))
        and all(len(sent) > 0 for sent in row)
    ]
    if len(candidates) < want:
        raise SelectionError(
            f"need {want} unique rows for dev/test, only {len(candidates)} available"
        )
    sel_idx = corpus.index(selection_lang)

    def oov_ratio(sent: Sentence) -> float:
        return sum(tok not in lm.vocab for tok in sent) / len(sent)

    ppl = {r: lm.perplexity([corpus.rows[r][sel_idx]]) for r in candidates}
    pool = sorted(candidates, key=lambda r: (-ppl[r], r))[: pool_factor * want]
    pool.sort(key=lambda r: oov_ratio(corpus.rows[r][sel_idx]))
    chosen = pool[:want]
    dev_rows, test_rows = set(chosen[:dev_size]), set(chosen[dev_size:])
    split = {"train": [], "dev": [], "test": []}
    for r, row in enumerate(corpus.rows):
        key = "dev" if r in dev_rows else "test" if r in test_rows else "train"
        split[key].append(row)
    return CorpusSplit(
        train=ParallelCorpus(corpus.languages, split["train"]),
        dev=ParallelCorpus(corpus.languages, split["dev"]),
        test=ParallelCorpus(corpus.languages, split["test"]),
    )
