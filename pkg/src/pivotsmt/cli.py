"""Command-line driver: one subcommand per pipeline stage plus two composite
pipelines that train, tune, translate and evaluate end to end.

Exit codes: 0 success, 2 usage, 3 configuration, 4 data, 5 internal.
All primary outputs are written atomically (temp file + rename); reruns
with identical inputs and seed produce byte-identical files.
"""

from __future__ import annotations

import argparse
import contextlib
import os
import sys
import tempfile
import time
from dataclasses import fields

from . import __version__
from . import align as align_mod
from . import lm as lm_mod
from . import metrics, phrases, pivot, tuning
from .config import PipelineConfig, load_config, parse_value
from .corpus import (
    ParallelCorpus,
    filter_corpus,
    read_corpus,
    select_dev_test,
    write_corpus,
)
from .decoder import DecoderConfig, default_weights, nbest, write_nbest
from .errors import ConfigError, DataError, PivotSmtError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_DATA = 4
EXIT_INTERNAL = 5


@contextlib.contextmanager
def atomic_output(path: str):
    """Yield a temp path in the target directory, rename into place on success."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".pivotsmt-")
    os.close(fd)
    try:
        yield tmp
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def read_sentences(path: str) -> list[tuple[str, ...]]:
    with open(path, encoding="utf-8") as fh:
        return [tuple(line.split()) for line in fh]


def write_sentences(path: str, sentences) -> None:
    with atomic_output(path) as tmp:
        with open(tmp, "w", encoding="utf-8") as fh:
            for sent in sentences:
                fh.write(" ".join(sent) + "\n")


def write_report(path: str, command: str, lines: list[str]) -> None:
    with atomic_output(path) as tmp:
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(f"command = {command}\n")
            for line in lines:
                fh.write(line + "\n")


# ----------------------------------------------------------------------
# configuration plumbing: every PipelineConfig key is also a CLI flag and
# flags always win over the config file.
# ----------------------------------------------------------------------

CONFIG_KEYS = tuple(f.name for f in fields(PipelineConfig))


def add_config_flags(parser: argparse.ArgumentParser, keys=CONFIG_KEYS) -> None:
    parser.add_argument("--config", metavar="FILE", default=None)
    for key in keys:
        parser.add_argument(
            "--" + key.replace("_", "-"),
            dest=f"cfg_{key}",
            metavar="V",
            default=None,
        )


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    cfg = load_config(args.config) if args.config else PipelineConfig()
    for key in CONFIG_KEYS:
        raw = getattr(args, f"cfg_{key}", None)
        if raw is not None:
            setattr(cfg, key, parse_value(key, str(raw)))
    env_jobs = os.environ.get("PIVOTSMT_JOBS")
    if env_jobs is not None and getattr(args, "cfg_jobs", None) is None:
        cfg.jobs = parse_value("jobs", env_jobs)
    cfg.validate()
    return cfg


def decoder_config(cfg: PipelineConfig, use_lex_reordering=None) -> DecoderConfig:
    return DecoderConfig(
        beam_size=cfg.beam_size,
        distortion_limit=cfg.distortion_limit,
        nbest_size=cfg.nbest_size,
        use_lex_reordering=(
            cfg.use_lex_reordering if use_lex_reordering is None else use_lex_reordering
        ),
        max_phrase_len=cfg.max_phrase_len,
    )


# ----------------------------------------------------------------------
# simple subcommands
# ----------------------------------------------------------------------

def cmd_prepare(args) -> int:
    cfg = resolve_config(args)
    langs = args.langs.split(",")
    if len(langs) < 2:
        raise ConfigError("--langs needs at least two comma-separated tags")
    if getattr(args, "cfg_pivot_lang", None) is not None or cfg.pivot_lang in langs:
        pivot_lang = cfg.pivot_lang
    else:
        pivot_lang = langs[-1]
    if pivot_lang not in langs:
        raise ConfigError(f"pivot language {pivot_lang!r} not in --langs")
    corpus = read_corpus(
        {lang: f"{args.inp}.{lang}" for lang in langs}, profile=cfg.profile
    )
    filtered = filter_corpus(corpus, cfg.max_len, cfg.max_ratio, pivot_lang)
    selection_lang = cfg.selection_lang or pivot_lang
    model = lm_mod.train_kn(filtered.column(selection_lang), cfg.lm_order)
    split = select_dev_test(
        filtered, model, selection_lang, cfg.dev_size, cfg.test_size, cfg.pool_factor
    )
    os.makedirs(args.out_dir, exist_ok=True)
    for name, part in (("train", split.train), ("dev", split.dev), ("test", split.test)):
        for lang in langs:
            with atomic_output(os.path.join(args.out_dir, f"{name}.{lang}")) as tmp:
                write_corpus(part.project([lang]), {lang: tmp})
    write_report(
        os.path.join(args.out_dir, "report.txt"),
        "prepare",
        [
            f"input_prefix = {args.inp}",
            f"languages = {','.join(langs)}",
            f"pivot_lang = {pivot_lang}",
            f"selection_lang = {selection_lang}",
            f"profile = {cfg.profile}",
            f"max_len = {cfg.max_len}",
            f"max_ratio = {cfg.max_ratio}",
            f"rows_in = {len(corpus)}",
            f"rows_filtered = {len(filtered)}",
            f"rows_train = {len(split.train)}",
            f"rows_dev = {len(split.dev)}",
            f"rows_test = {len(split.test)}",
        ],
    )
    return EXIT_OK


def cmd_build_lm(args) -> int:
    cfg = resolve_config(args)
    order = int(args.order) if args.order else cfg.lm_order
    sentences = read_sentences(args.inp)
    if not sentences:
        raise DataError(f"{args.inp}: empty corpus")
    model = lm_mod.train_kn(sentences, order)
    with atomic_output(args.out) as tmp:
        lm_mod.write_arpa(model, tmp)
    write_report(
        args.out + ".report.txt",
        "build-lm",
        [
            f"input = {args.inp}",
            f"order = {order}",
            f"sentences = {len(sentences)}",
            f"vocab = {len(model.predicted_vocab)}",
            f"perplexity_train = {lm_mod.perplexity(model, sentences):.6f}",
        ],
    )
    return EXIT_OK


def cmd_align(args) -> int:
    cfg = resolve_config(args)
    src = read_sentences(args.src)
    tgt = read_sentences(args.tgt)
    if len(src) != len(tgt):
        raise DataError(f"line count mismatch: {len(src)} vs {len(tgt)}")
    bitext = list(zip(src, tgt))
    iterations = int(args.iterations) if args.iterations else cfg.em_iterations
    alignments, lex_fwd, lex_rev = align_mod.align_corpus(bitext, iterations)
    with atomic_output(args.out) as tmp:
        align_mod.write_alignments(tmp, alignments)
    if args.lex_fwd_out:
        with atomic_output(args.lex_fwd_out) as tmp:
            lex_fwd.save(tmp)
    if args.lex_rev_out:
        with atomic_output(args.lex_rev_out) as tmp:
            lex_rev.save(tmp)
    write_report(
        args.out + ".report.txt",
        "align",
        [
            f"src = {args.src}",
            f"tgt = {args.tgt}",
            f"iterations = {iterations}",
            f"pairs = {len(bitext)}",
            f"loglik_fwd = {' '.join(f'{v:.4f}' for v in lex_fwd.log_likelihoods)}",
            f"loglik_rev = {' '.join(f'{v:.4f}' for v in lex_rev.log_likelihoods)}",
        ],
    )
    return EXIT_OK


def cmd_build_tm(args) -> int:
    cfg = resolve_config(args)
    src = read_sentences(args.src)
    tgt = read_sentences(args.tgt)
    bitext = list(zip(src, tgt))
    alignments = align_mod.read_alignments(args.align, bitext)
    lex_fwd = align_mod.Lexicon.load(args.lex_fwd)
    lex_rev = align_mod.Lexicon.load(args.lex_rev)
    table = phrases.build_phrase_table(
        bitext, alignments, lex_fwd, lex_rev, cfg.max_phrase_len
    )
    with atomic_output(args.out) as tmp:
        table.save(tmp)
    lines = [
        f"src = {args.src}",
        f"tgt = {args.tgt}",
        f"max_phrase_len = {cfg.max_phrase_len}",
        f"phrase_pairs = {len(table)}",
    ]
    if args.reo_out:
        reo = phrases.estimate_lex_reordering(bitext, alignments, cfg.max_phrase_len)
        with atomic_output(args.reo_out) as tmp:
            phrases.save_reordering(reo, tmp)
        lines.append(f"reordering_entries = {len(reo)}")
    write_report(args.out + ".report.txt", "build-tm", lines)
    return EXIT_OK


def cmd_tune(args) -> int:
    cfg = resolve_config(args)
    system = pivot.TranslationSystem.load(args.sys)
    dev_src = read_sentences(args.dev_src)
    dev_ref = read_sentences(args.dev_ref)
    if len(dev_src) != len(dev_ref):
        raise DataError(f"line count mismatch: {len(dev_src)} vs {len(dev_ref)}")
    rounds = int(args.rounds) if args.rounds else cfg.tune_rounds
    weights, history = tuning.tune_weights(
        list(zip(dev_src, dev_ref)),
        system.table,
        system.reo_table,
        system.lm,
        system.config,
        rounds=rounds,
    )
    out = args.out or os.path.join(args.sys, "weights.txt")
    with atomic_output(out) as tmp:
        from .decoder import save_weights

        save_weights(weights, tmp)
    write_report(
        out + ".report.txt",
        "tune",
        [
            f"system = {args.sys}",
            f"dev_sentences = {len(dev_src)}",
            f"rounds_run = {len(history)}",
            f"pool_bleu = {' '.join(f'{b:.6f}' for b in history)}",
        ]
        + [f"weight {name} = {weights[name]!r}" for name in sorted(weights)],
    )
    return EXIT_OK


def cmd_translate(args) -> int:
    cfg = resolve_config(args)
    system = pivot.TranslationSystem.load(args.sys)
    if args.cfg_beam_size is not None:
        system.config.beam_size = cfg.beam_size
    sentences = read_sentences(args.inp)
    outputs = pivot.translate_corpus(system, sentences, stage="translate")
    write_sentences(args.out, outputs)
    write_report(
        args.out + ".report.txt",
        "translate",
        [
            f"system = {args.sys}",
            f"input = {args.inp}",
            f"sentences = {len(sentences)}",
            f"beam_size = {system.config.beam_size}",
        ],
    )
    if args.nbest_out:
        size = int(args.nbest) if args.nbest else system.config.nbest_size
        nconfig = DecoderConfig(
            beam_size=system.config.beam_size,
            distortion_limit=system.config.distortion_limit,
            nbest_size=size,
            use_lex_reordering=system.config.use_lex_reordering,
            max_phrase_len=system.config.max_phrase_len,
        )
        lists = [
            nbest(s, system.table, system.reo_table, system.lm,
                  system.weights, nconfig)
            for s in sentences
        ]
        with atomic_output(args.nbest_out) as tmp:
            write_nbest(tmp, lists)
    return EXIT_OK


def cmd_triangulate(args) -> int:
    resolve_config(args)
    table_sp = phrases.PhraseTable.load(args.sp)
    table_pt = phrases.PhraseTable.load(args.pt)
    top_k = int(args.top_k) if args.top_k else None
    table = pivot.triangulate(table_sp, table_pt, top_k)
    with atomic_output(args.out) as tmp:
        table.save(tmp)
    write_report(
        args.out + ".report.txt",
        "triangulate",
        [
            f"sp = {args.sp} ({len(table_sp)} pairs)",
            f"pt = {args.pt} ({len(table_pt)} pairs)",
            f"top_k = {top_k}",
            f"joined_pairs = {len(table)}",
        ],
    )
    return EXIT_OK


def cmd_cascade(args) -> int:
    resolve_config(args)
    sys_sp = pivot.TranslationSystem.load(args.sp_sys)
    sys_pt = pivot.TranslationSystem.load(args.pt_sys)
    sentences = read_sentences(args.inp)
    outputs = pivot.cascade_translate(sentences, sys_sp, sys_pt)
    write_sentences(args.out, outputs)
    write_report(
        args.out + ".report.txt",
        "cascade",
        [
            f"sp_sys = {args.sp_sys}",
            f"pt_sys = {args.pt_sys}",
            f"sentences = {len(sentences)}",
        ],
    )
    return EXIT_OK


def cmd_pseudo(args) -> int:
    resolve_config(args)
    src_path, piv_path = _pair(args.sp_corpus, "--sp-corpus")
    out_src, out_tgt = _pair(args.out, "--out")
    sys_pt = pivot.TranslationSystem.load(args.pt_sys)
    corpus = ParallelCorpus(
        ("src", "piv"),
        list(zip(read_sentences(src_path), read_sentences(piv_path))),
    )
    pseudo_corpus, empty = pivot.build_pseudo_corpus(corpus, sys_pt)
    write_sentences(out_src, pseudo_corpus.column("src"))
    write_sentences(out_tgt, pseudo_corpus.column("pseudo"))
    write_report(
        out_tgt + ".report.txt",
        "pseudo",
        [
            f"sp_corpus = {args.sp_corpus}",
            f"rows = {len(pseudo_corpus)}",
            f"empty_translations = {empty}",
        ],
    )
    return EXIT_OK


def _pair(value: str, flag: str) -> tuple[str, str]:
    parts = value.split(",")
    if len(parts) != 2:
        raise ConfigError(f"{flag} expects two comma-separated paths")
    return parts[0], parts[1]


def cmd_mbr(args) -> int:
    resolve_config(args)
    lists = [read_sentences(path) for path in args.lists]
    if len({len(lst) for lst in lists}) > 1:
        raise DataError("MBR input files have different line counts")
    per_sentence = [list(cands) for cands in zip(*lists)]
    selected = metrics.mbr_corpus(per_sentence)
    write_sentences(args.out, selected)
    write_report(
        args.out + ".report.txt",
        "mbr",
        [
            f"lists = {' '.join(args.lists)}",
            f"hypotheses_per_sentence = {len(lists)}",
            f"sentences = {len(selected)}",
        ],
    )
    return EXIT_OK


def cmd_evaluate(args) -> int:
    resolve_config(args)
    hyps = read_sentences(args.hyp)
    refs = read_sentences(args.ref)
    report = metrics.bleu_corpus(hyps, refs)
    print(f"hypotheses:      {args.hyp}")
    print(f"references:      {args.ref}")
    print(f"sentences:       {len(hyps)}")
    print(f"bleu:            {report.bleu:.6f}")
    for n, p in enumerate(report.precisions, 1):
        print(f"precision p{n}:    {p:.6f}")
    print(f"brevity penalty: {report.brevity_penalty:.6f}")
    print(report.summary())
    if args.report:
        write_report(args.report, "evaluate", [report.summary()])
    return EXIT_OK


def cmd_significance(args) -> int:
    cfg = resolve_config(args)
    verdict = metrics.bootstrap_significance(
        read_sentences(args.a),
        read_sentences(args.b),
        read_sentences(args.ref),
        samples=cfg.samples,
        level=cfg.level,
        seed=cfg.seed,
    )
    print(verdict.summary())
    if args.report:
        write_report(args.report, "significance", [verdict.summary()])
    return EXIT_OK


def cmd_rquantity(args) -> int:
    resolve_config(args)
    src = read_sentences(args.src)
    tgt = read_sentences(args.tgt)
    if len(src) != len(tgt):
        raise DataError(f"line count mismatch: {len(src)} vs {len(tgt)}")
    with open(args.align, encoding="utf-8") as fh:
        lines = [line.strip() for line in fh]
    if len(lines) != len(src):
        raise DataError(f"{args.align}: {len(lines)} lines for {len(src)} pairs")
    matrices = [
        align_mod.parse_pharaoh(line, len(s), len(t))
        for line, s, t in zip(lines, src, tgt)
    ]
    average, _ = metrics.rquantity(matrices)
    print(f"rquantity = {average:.6f} over {len(matrices)} sentences")
    if args.report:
        write_report(args.report, "rquantity", [f"rquantity = {average:.6f}"])
    return EXIT_OK


# ----------------------------------------------------------------------
# composite pipelines
# ----------------------------------------------------------------------

def _prepare_shared(cfg: PipelineConfig, data_dir: str, work_dir: str) -> str:
    """Tokenize/filter/split the raw corpus once per work directory."""
    out_dir = os.path.join(work_dir, "data")
    langs = [cfg.src_lang, cfg.pivot_lang, cfg.tgt_lang]
    if all(
        os.path.exists(os.path.join(out_dir, f"{part}.{lang}"))
        for part in ("train", "dev", "test")
        for lang in langs
    ):
        return out_dir
    paths = {lang: os.path.join(data_dir, f"corpus.{lang}") for lang in langs}
    for lang, path in paths.items():
        if not os.path.exists(path):
            raise DataError(f"missing corpus file for {lang!r}: {path}")
    corpus = read_corpus(paths, profile=cfg.profile)
    filtered = filter_corpus(corpus, cfg.max_len, cfg.max_ratio, cfg.pivot_lang)
    selection_lang = cfg.selection_lang or cfg.pivot_lang
    model = lm_mod.train_kn(filtered.column(selection_lang), cfg.lm_order)
    split = select_dev_test(
        filtered, model, selection_lang, cfg.dev_size, cfg.test_size, cfg.pool_factor
    )
    os.makedirs(out_dir, exist_ok=True)
    for name, part in (("train", split.train), ("dev", split.dev), ("test", split.test)):
        for lang in langs:
            with atomic_output(os.path.join(out_dir, f"{name}.{lang}")) as tmp:
                write_corpus(part.project([lang]), {lang: tmp})
    write_report(
        os.path.join(out_dir, "report.txt"),
        "prepare",
        [
            f"rows_in = {len(corpus)}",
            f"rows_filtered = {len(filtered)}",
            f"rows_train = {len(split.train)}",
            f"rows_dev = {len(split.dev)}",
            f"rows_test = {len(split.test)}",
        ],
    )
    return out_dir


def _read_part(data_dir: str, part: str, lang: str) -> list[tuple[str, ...]]:
    return read_sentences(os.path.join(data_dir, f"{part}.{lang}"))


def _train_system(
    cfg: PipelineConfig,
    data_dir: str,
    out_dir: str,
    src_lang: str,
    tgt_lang: str,
    use_lex_reordering: bool,
    train_override=None,
    target_lm: lm_mod.NGramModel | None = None,
) -> pivot.TranslationSystem:
    """Align, extract, estimate, tune; returns the saved, tuned system."""
    if train_override is not None:
        bitext = train_override
    else:
        bitext = list(
            zip(_read_part(data_dir, "train", src_lang),
                _read_part(data_dir, "train", tgt_lang))
        )
    bitext = [(s, t) for s, t in bitext if s and t]
    alignments, lex_fwd, lex_rev = align_mod.align_corpus(bitext, cfg.em_iterations)
    table = phrases.build_phrase_table(
        bitext, alignments, lex_fwd, lex_rev, cfg.max_phrase_len
    )
    reo = (
        phrases.estimate_lex_reordering(bitext, alignments, cfg.max_phrase_len)
        if use_lex_reordering
        else None
    )
    model = target_lm or lm_mod.train_kn(
        [t for _, t in bitext], cfg.lm_order
    )
    system = pivot.TranslationSystem(
        table=table,
        lm=model,
        weights=default_weights(use_lex_reordering),
        config=decoder_config(cfg, use_lex_reordering),
        reo_table=reo,
    )
    dev = list(
        zip(_read_part(data_dir, "dev", src_lang),
            _read_part(data_dir, "dev", tgt_lang))
    )
    dev = [(s, t) for s, t in dev if s and t]
    weights, history = tuning.tune_weights(
        dev, table, reo, model, system.config, rounds=cfg.tune_rounds
    )
    system.weights = weights
    system.save(out_dir)
    write_report(
        os.path.join(out_dir, "report.txt"),
        "train-system",
        [
            f"direction = {src_lang} -> {tgt_lang}",
            f"train_pairs = {len(bitext)}",
            f"phrase_pairs = {len(table)}",
            f"lex_reordering = {use_lex_reordering}",
            f"tuning_pool_bleu = {' '.join(f'{b:.6f}' for b in history)}",
        ],
    )
    return system


def _evaluate_output(out_path: str, hyps, refs) -> metrics.BleuReport:
    write_sentences(out_path, hyps)
    return metrics.bleu_corpus(hyps, refs)


def cmd_pipeline_direct(args) -> int:
    cfg = resolve_config(args)
    data_dir = args.data or cfg.data_dir
    work_dir = args.work or cfg.work_dir
    if not data_dir or not work_dir:
        raise ConfigError("pipeline-direct needs --data and --work (or config keys)")
    prepared = _prepare_shared(cfg, data_dir, work_dir)
    system = _train_system(
        cfg, prepared, os.path.join(work_dir, "direct"),
        cfg.src_lang, cfg.tgt_lang, cfg.use_lex_reordering,
    )
    test_src = _read_part(prepared, "test", cfg.src_lang)
    test_ref = _read_part(prepared, "test", cfg.tgt_lang)
    hyps = pivot.translate_corpus(system, test_src, stage="direct")
    report = _evaluate_output(
        os.path.join(work_dir, "outputs", "direct.txt"), hyps, test_ref
    )
    print(f"direct {report.summary()}")
    write_report(
        os.path.join(work_dir, "direct", "evaluation.txt"),
        "pipeline-direct",
        [f"test_sentences = {len(hyps)}", f"direct {report.summary()}"],
    )
    return EXIT_OK


def cmd_pipeline_pivot(args) -> int:
    cfg = resolve_config(args)
    data_dir = args.data or cfg.data_dir
    work_dir = args.work or cfg.work_dir
    if not data_dir or not work_dir:
        raise ConfigError("pipeline-pivot needs --data and --work (or config keys)")
    strategies = (
        ("cascade", "pseudo", "triangulation")
        if args.strategy == "all"
        else (args.strategy,)
    )
    prepared = _prepare_shared(cfg, data_dir, work_dir)
    test_src = _read_part(prepared, "test", cfg.src_lang)
    test_ref = _read_part(prepared, "test", cfg.tgt_lang)
    target_lm = lm_mod.train_kn(
        _read_part(prepared, "train", cfg.tgt_lang), cfg.lm_order
    )
    sys_sp = _train_system(
        cfg, prepared, os.path.join(work_dir, "sp_sys"),
        cfg.src_lang, cfg.pivot_lang, cfg.use_lex_reordering,
    )
    sys_pt = _train_system(
        cfg, prepared, os.path.join(work_dir, "pt_sys"),
        cfg.pivot_lang, cfg.tgt_lang, cfg.use_lex_reordering,
        target_lm=target_lm,
    )
    outputs_dir = os.path.join(work_dir, "outputs")
    results: list[tuple[str, metrics.BleuReport]] = []
    produced: dict[str, list] = {}

    if "cascade" in strategies:
        hyps = pivot.cascade_translate(test_src, sys_sp, sys_pt)
        produced["cascade"] = hyps
        results.append(
            ("cascade", _evaluate_output(
                os.path.join(outputs_dir, "cascade.txt"), hyps, test_ref))
        )
    if "pseudo" in strategies:
        train_sp = ParallelCorpus(
            (cfg.src_lang, cfg.pivot_lang),
            list(zip(_read_part(prepared, "train", cfg.src_lang),
                     _read_part(prepared, "train", cfg.pivot_lang))),
        )
        pseudo_corpus, _ = pivot.build_pseudo_corpus(train_sp, sys_pt)
        pseudo_sys = _train_system(
            cfg, prepared, os.path.join(work_dir, "pseudo_sys"),
            cfg.src_lang, cfg.tgt_lang, cfg.use_lex_reordering,
            train_override=list(zip(pseudo_corpus.column(cfg.src_lang),
                                    pseudo_corpus.column("pseudo"))),
            target_lm=target_lm,
        )
        hyps = pivot.translate_corpus(pseudo_sys, test_src, stage="pseudo")
        produced["pseudo"] = hyps
        results.append(
            ("pseudo", _evaluate_output(
                os.path.join(outputs_dir, "pseudo.txt"), hyps, test_ref))
        )
    if "triangulation" in strategies:
        tri_table = pivot.triangulate(sys_sp.table, sys_pt.table)
        tri_sys = pivot.TranslationSystem(
            table=tri_table,
            lm=target_lm,
            weights=default_weights(False),
            config=decoder_config(cfg, use_lex_reordering=False),
            reo_table=None,
        )
        dev = list(zip(_read_part(prepared, "dev", cfg.src_lang),
                       _read_part(prepared, "dev", cfg.tgt_lang)))
        tri_sys.weights, _ = tuning.tune_weights(
            [(s, t) for s, t in dev if s and t],
            tri_table, None, target_lm, tri_sys.config, rounds=cfg.tune_rounds,
        )
        tri_sys.save(os.path.join(work_dir, "tri_sys"))
        hyps = pivot.translate_corpus(tri_sys, test_src, stage="triangulation")
        produced["triangulation"] = hyps
        results.append(
            ("triangulation", _evaluate_output(
                os.path.join(outputs_dir, "triangulation.txt"), hyps, test_ref))
        )

    if len(produced) >= 3:
        lists = [produced[name] for name in ("cascade", "pseudo", "triangulation")]
        combined = metrics.mbr_corpus([list(c) for c in zip(*lists)])
        results.append(
            ("mbr", _evaluate_output(
                os.path.join(outputs_dir, "mbr.txt"), combined, test_ref))
        )

    lines = [f"strategies = {','.join(strategies)}"]
    for name, report in results:
        print(f"{name} {report.summary()}")
        lines.append(f"{name} {report.summary()}")
    direct_path = os.path.join(outputs_dir, "direct.txt")
    if os.path.exists(direct_path) and results:
        direct_hyps = read_sentences(direct_path)
        best_name, best_hyps = max(
            ((name, produced[name]) for name in produced),
            key=lambda item: metrics.bleu_corpus(item[1], test_ref).bleu,
        )
        verdict = metrics.bootstrap_significance(
            best_hyps, direct_hyps, test_ref,
            samples=cfg.samples, level=cfg.level, seed=cfg.seed,
        )
        lines.append(f"significance {best_name} (A) vs direct (B): {verdict.summary()}")
        print(f"significance {best_name} vs direct: {verdict.summary()}")
    write_report(os.path.join(work_dir, "pivot-report.txt"), "pipeline-pivot", lines)
    return EXIT_OK


# ----------------------------------------------------------------------
# argument parsing and dispatch
# ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pivotsmt",
        description="Miniature phrase-based SMT toolkit with pivot strategies.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="tokenize, filter and split a raw corpus")
    p.add_argument("--in", dest="inp", required=True, metavar="PREFIX")
    p.add_argument("--langs", required=True, metavar="L1,L2[,L3...]")
    p.add_argument("--out-dir", required=True)
    add_config_flags(p)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("build-lm", help="train a Kneser-Ney ARPA language model")
    p.add_argument("--order", default=None)
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    add_config_flags(p)
    p.set_defaults(func=cmd_build_lm)

    p = sub.add_parser("align", help="EM-train lexicons and symmetrized alignments")
    p.add_argument("--src", required=True)
    p.add_argument("--tgt", required=True)
    p.add_argument("--iterations", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--lex-fwd-out", default=None)
    p.add_argument("--lex-rev-out", default=None)
    add_config_flags(p)
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("build-tm", help="extract phrases and score the table")
    p.add_argument("--src", required=True)
    p.add_argument("--tgt", required=True)
    p.add_argument("--align", required=True)
    p.add_argument("--lex-fwd", required=True)
    p.add_argument("--lex-rev", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--reo-out", default=None)
    add_config_flags(p)
    p.set_defaults(func=cmd_build_tm)

    p = sub.add_parser("tune", help="coordinate-ascent weight tuning on a dev set")
    p.add_argument("--sys", required=True)
    p.add_argument("--dev-src", required=True)
    p.add_argument("--dev-ref", required=True)
    p.add_argument("--rounds", default=None)
    p.add_argument("--out", default=None)
    add_config_flags(p)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("translate", help="decode a file with a trained system")
    p.add_argument("--sys", required=True)
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--nbest", default=None)
    p.add_argument("--nbest-out", default=None)
    add_config_flags(p)
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("triangulate", help="join two phrase tables over the pivot")
    p.add_argument("--sp", required=True)
    p.add_argument("--pt", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--top-k", default=None)
    add_config_flags(p)
    p.set_defaults(func=cmd_triangulate)

    p = sub.add_parser("cascade", help="chain two systems source->pivot->target")
    p.add_argument("--sp-sys", required=True)
    p.add_argument("--pt-sys", required=True)
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    add_config_flags(p)
    p.set_defaults(func=cmd_cascade)

    p = sub.add_parser("pseudo", help="translate the pivot side into a synthetic corpus")
    p.add_argument("--sp-corpus", required=True, metavar="SRC,PIV")
    p.add_argument("--pt-sys", required=True)
    p.add_argument("--out", required=True, metavar="SRC,TGT")
    add_config_flags(p)
    p.set_defaults(func=cmd_pseudo)

    p = sub.add_parser("mbr", help="minimum-Bayes-risk combination of outputs")
    p.add_argument("--lists", nargs="+", required=True)
    p.add_argument("--out", required=True)
    add_config_flags(p)
    p.set_defaults(func=cmd_mbr)

    p = sub.add_parser("evaluate", help="corpus BLEU of a hypothesis file")
    p.add_argument("--hyp", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--report", default=None)
    add_config_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("significance", help="pair bootstrap significance test")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--report", default=None)
    add_config_flags(p)
    p.set_defaults(func=cmd_significance)

    p = sub.add_parser("rquantity", help="reordering quantity of aligned corpora")
    p.add_argument("--src", required=True)
    p.add_argument("--tgt", required=True)
    p.add_argument("--align", required=True)
    p.add_argument("--report", default=None)
    add_config_flags(p)
    p.set_defaults(func=cmd_rquantity)

    p = sub.add_parser("pipeline-direct", help="train/tune/translate/evaluate direct")
    p.add_argument("--data", default=None)
    p.add_argument("--work", default=None)
    add_config_flags(p)
    p.set_defaults(func=cmd_pipeline_direct)

    p = sub.add_parser("pipeline-pivot", help="build pivot systems and combine them")
    p.add_argument("--data", default=None)
    p.add_argument("--work", default=None)
    p.add_argument(
        "--strategy",
        default="all",
        choices=("cascade", "pseudo", "triangulation", "all"),
    )
    add_config_flags(p)
    p.set_defaults(func=cmd_pipeline_pivot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    start = time.monotonic()
    try:
        status = args.func(args)
    except ConfigError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, PivotSmtError) as exc:
        print(f"error: data: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: data: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001 - map anything else to internal
        print(f"error: internal: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    elapsed = time.monotonic() - start
    if status == EXIT_OK and args.command.startswith("pipeline"):
        print(f"{args.command} finished in {elapsed:.1f}s")
    return status


if __name__ == "__main__":
    raise SystemExit(main())
