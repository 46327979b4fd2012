"""Pivot-language strategies: cascaded decoding, pseudo-corpus, triangulation.

A TranslationSystem bundles everything one direction needs (phrase table,
optional lexicalized reordering table, language model, weights, decoder
settings) and round-trips through a directory of text files so trained
systems can be chained from the command line.
"""

from __future__ import annotations

import os
import warnings
from collections import defaultdict
from dataclasses import dataclass

from . import lm as lm_mod
from .corpus import ParallelCorpus, Sentence
from .decoder import (
    DecoderConfig,
    decode,
    default_weights,
    load_weights,
    save_weights,
)
from .errors import DataError, PivotSmtError
from .phrases import Phrase, PhraseEntry, PhraseTable, load_reordering, save_reordering


@dataclass
class TranslationSystem:
    table: PhraseTable
    lm: lm_mod.NGramModel
    weights: dict[str, float]
    config: DecoderConfig
    reo_table: dict | None = None

    def translate(self, sentence: Sentence) -> Sentence:
        return decode(
            sentence, self.table, self.reo_table, self.lm, self.weights, self.config
        ).tokens

    def save(self, path: str) -> None:
        os.makedirs(path, exist_ok=True)
        self.table.save(os.path.join(path, "phrase_table.txt"))
        lm_mod.write_arpa(self.lm, os.path.join(path, "lm.arpa"))
        save_weights(self.weights, os.path.join(path, "weights.txt"))
        if self.reo_table is not None:
            save_reordering(self.reo_table, os.path.join(path, "reordering.txt"))
        with open(os.path.join(path, "system.cfg"), "w", encoding="utf-8") as fh:
            fh.write(f"beam_size = {self.config.beam_size}\n")
            limit = self.config.distortion_limit
            fh.write(f"distortion_limit = {'none' if limit is None else limit}\n")
            fh.write(f"nbest_size = {self.config.nbest_size}\n")
            fh.write(f"use_lex_reordering = {str(self.config.use_lex_reordering).lower()}\n")
            fh.write(f"max_phrase_len = {self.config.max_phrase_len}\n")

    @classmethod
    def load(cls, path: str) -> "TranslationSystem":
        cfg_path = os.path.join(path, "system.cfg")
        if not os.path.exists(cfg_path):
            raise DataError(f"not a system directory (no system.cfg): {path}")
        raw = {}
        with open(cfg_path, encoding="utf-8") as fh:
            for line in fh:
                if "=" in line:
                    key, _, val = line.partition("=")
                    raw[key.strip()] = val.strip()
        limit = raw.get("distortion_limit", "6")
        config = DecoderConfig(
            beam_size=int(raw.get("beam_size", "100")),
            distortion_limit=None if limit == "none" else int(limit),
            nbest_size=int(raw.get("nbest_size", "100")),
            use_lex_reordering=raw.get("use_lex_reordering", "true") == "true",
            max_phrase_len=int(raw.get("max_phrase_len", "10")),
        )
        reo_path = os.path.join(path, "reordering.txt")
        return cls(
            table=PhraseTable.load(os.path.join(path, "phrase_table.txt")),
            lm=lm_mod.read_arpa(os.path.join(path, "lm.arpa")),
            weights=load_weights(os.path.join(path, "weights.txt")),
            config=config,
            reo_table=load_reordering(reo_path) if os.path.exists(reo_path) else None,
        )


def translate_corpus(
    system: TranslationSystem, sentences: list[Sentence], stage: str = "system"
) -> list[Sentence]:
    out = []
    for k, sent in enumerate(sentences):
        try:
            out.append(system.translate(sent))
        except PivotSmtError as exc:
            raise type(exc)(f"[stage {stage}, sentence {k}] {exc}") from exc
    return out


def cascade_translate(
    sentences: list[Sentence],
    sys_sp: TranslationSystem,
    sys_pt: TranslationSystem,
) -> list[Sentence]:
    """Two-step decoding: 1-best source->pivot output feeds pivot->target."""
    pivots = translate_corpus(sys_sp, sentences, stage="sp")
    return translate_corpus(sys_pt, pivots, stage="pt")


def build_pseudo_corpus(
    bitext_sp: ParallelCorpus,
    sys_pt: TranslationSystem,
    target_lang: str = "pseudo",
) -> tuple[ParallelCorpus, int]:
    """Translate the pivot side of a source-pivot corpus into the target.

    Returns the synthetic source-target corpus (source side verbatim, row
    count preserved) plus the number of rows whose translation came back
    empty; such rows are kept so corpus-level invariants stay checkable.
    """
    if len(bitext_sp.languages) != 2:
        raise DataError("pseudo-corpus input must have exactly two languages")
    src_lang, pivot_lang = bitext_sp.languages
    translations = translate_corpus(
        sys_pt, bitext_sp.column(pivot_lang), stage="pt"
    )
    rows = [
        (row[0], translation)
        for row, translation in zip(bitext_sp.rows, translations)
    ]
    empty = sum(1 for _, t in rows if not t)
    if empty:
        warnings.warn(f"pseudo-corpus: {empty} rows translated to empty sentences")
    return ParallelCorpus((src_lang, target_lang), rows), empty


def triangulate(
    table_sp: PhraseTable,
    table_pt: PhraseTable,
    prune_top_k: int | None = None,
) -> PhraseTable:
    """Join two phrase tables over their shared pivot phrases.

    p(t|s) = sum_p p(t|p) p(p|s) and p(s|t) = sum_p p(s|p) p(p|t); the
    lexical weights marginalize the same way.  Joint counts become
    sum_p min(N_sp(s,p), N_pt(p,t)) pseudo-counts kept for introspection
    only, with marginals re-derived from them.  prune_top_k keeps only the
    k strongest pivot options per source phrase (by p(p|s)) before the
    join.
    """
    acc: dict[Phrase, dict[Phrase, list[float]]] = defaultdict(
        lambda: defaultdict(lambda: [0.0, 0.0, 0.0, 0.0, 0])
    )
    joined = 0
    for src in sorted(table_sp.entries):
        pivot_options = table_sp.options(src)
        if prune_top_k is not None:
            pivot_options = sorted(
                pivot_options, key=lambda it: (-it[1].p_t_given_s, it[0])
            )[:prune_top_k]
        for pvt, e_sp in pivot_options:
            if pvt not in table_pt:
                continue
            for tgt, e_pt in table_pt.options(pvt):
                cell = acc[src][tgt]
                cell[0] += e_sp.p_s_given_t * e_pt.p_s_given_t
                cell[1] += e_sp.p_t_given_s * e_pt.p_t_given_s
                cell[2] += e_sp.lex_s_given_t * e_pt.lex_s_given_t
                cell[3] += e_sp.lex_t_given_s * e_pt.lex_t_given_s
                cell[4] += min(e_sp.joint_count, e_pt.joint_count)
                joined += 1
    if not joined:
        warnings.warn("triangulation produced an empty table (no shared pivots)")
        return PhraseTable()
    src_count: dict[Phrase, int] = defaultdict(int)
    tgt_count: dict[Phrase, int] = defaultdict(int)
    for src, tgts in acc.items():
        for tgt, cell in tgts.items():
            src_count[src] += cell[4]
            tgt_count[tgt] += cell[4]
    out = PhraseTable()
    for src, tgts in acc.items():
        for tgt, cell in tgts.items():
            out.entries[src][tgt] = PhraseEntry(
                p_s_given_t=cell[0],
                p_t_given_s=cell[1],
                lex_s_given_t=cell[2],
                lex_t_given_s=cell[3],
                joint_count=cell[4],
                src_count=src_count[src],
                tgt_count=tgt_count[tgt],
            )
    return out


def identity_table(phrases: list[Phrase]) -> PhraseTable:
    """Phrase table mapping each phrase to itself with unit scores."""
    table = PhraseTable()
    for ph in phrases:
        table.entries[ph][ph] = PhraseEntry(
            p_s_given_t=1.0,
            p_t_given_s=1.0,
            lex_s_given_t=1.0,
            lex_t_given_s=1.0,
            joint_count=1,
            src_count=1,
            tgt_count=1,
        )
    return table


def identity_system(vocab) -> TranslationSystem:
    """System that reproduces its input: identity table over single tokens,
    uniform LM, distance-only reordering."""
    vocab = sorted(set(vocab))
    return TranslationSystem(
        table=identity_table([(w,) for w in vocab]),
        lm=lm_mod.uniform_unigram_model(vocab),
        weights=default_weights(False),
        config=DecoderConfig(
            beam_size=50, distortion_limit=0, nbest_size=1, use_lex_reordering=False
        ),
    )
