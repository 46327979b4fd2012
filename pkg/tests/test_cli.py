import os
import warnings

import pytest

from pivotsmt import lm as lm_mod
from pivotsmt.cli import build_parser, main, resolve_config
from pivotsmt.config import (
    PipelineConfig,
    load_config,
    parse_value,
    save_config,
    serialize_config,
)
from pivotsmt.errors import ConfigError
from pivotsmt.pivot import identity_system

from dataclasses import fields


class TestConfigFile:
    def test_comments_only_gives_defaults(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("# nothing\n\n   # more nothing\n")
        assert load_config(str(path)) == PipelineConfig()

    def test_negative_beam_rejected_by_name(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("beam_size = -1\n")
        with pytest.raises(ConfigError, match="beam_size"):
            load_config(str(path))

    def test_unknown_key_rejected_with_line(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("# ok\nbogus_key = 1\n")
        with pytest.raises(ConfigError, match="2"):
            load_config(str(path))

    def test_malformed_line_reports_number(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("just words\n")
        with pytest.raises(ConfigError, match="1"):
            load_config(str(path))

    def test_round_trip(self, tmp_path):
        cfg = PipelineConfig(
            src_lang="zh", tgt_lang="es", beam_size=17, max_ratio=2.5,
            distortion_limit=None, use_lex_reordering=False, level=0.95,
        )
        path = tmp_path / "c.cfg"
        save_config(cfg, str(path))
        assert load_config(str(path)) == cfg
        assert serialize_config(load_config(str(path))) == serialize_config(cfg)

    def test_none_distortion(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("distortion_limit = none\n")
        assert load_config(str(path)).distortion_limit is None

    def test_bad_type(self):
        with pytest.raises(ConfigError):
            parse_value("beam_size", "large")
        with pytest.raises(ConfigError):
            parse_value("use_lex_reordering", "yes")


class TestFlagPrecedence:
    SAMPLES = {
        "int": "7",
        "float": "1.5",
        "bool": "false",
        "str": "other",
        "int | None": "9",
    }
    FILE_SAMPLES = {
        "int": "3",
        "float": "2.5",
        "bool": "true",
        "str": "filevalue",
        "int | None": "none",
    }

    @pytest.mark.parametrize("field", [f.name for f in fields(PipelineConfig)])
    def test_flag_overrides_file_for_every_key(self, field, tmp_path):
        ftype = {f.name: f.type for f in fields(PipelineConfig)}[field]
        if field in ("data_dir",):  # must be an existing dir to validate
            file_value, flag_value = str(tmp_path / "a"), str(tmp_path / "b")
            os.makedirs(file_value)
            os.makedirs(flag_value)
        elif field == "profile":
            file_value, flag_value = "standard", "pretokenized"
        elif field == "level":
            file_value, flag_value = "0.9", "0.95"
        else:
            file_value, flag_value = self.FILE_SAMPLES[ftype], self.SAMPLES[ftype]
        cfg_path = tmp_path / "c.cfg"
        cfg_path.write_text(f"{field} = {file_value}\n")
        parser = build_parser()
        args = parser.parse_args(
            [
                "pipeline-direct",
                "--config", str(cfg_path),
                "--" + field.replace("_", "-"), str(flag_value),
            ]
        )
        effective = resolve_config(args)
        assert getattr(effective, field) == parse_value(field, str(flag_value))
        # and without the flag, the file value holds
        args = parser.parse_args(["pipeline-direct", "--config", str(cfg_path)])
        effective = resolve_config(args)
        assert getattr(effective, field) == parse_value(field, str(file_value))

    def test_env_jobs_used_when_flag_absent(self, tmp_path, monkeypatch):
        monkeypatch.setenv("PIVOTSMT_JOBS", "4")
        parser = build_parser()
        args = parser.parse_args(["pipeline-direct"])
        assert resolve_config(args).jobs == 4
        args = parser.parse_args(["pipeline-direct", "--jobs", "2"])
        assert resolve_config(args).jobs == 2


def write_lines(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(row + "\n")


class TestCommands:
    def test_unknown_subcommand_usage_error(self, capsys):
        assert main(["frobnicate"]) == 2

    def test_missing_required_flag_usage_error(self):
        assert main(["evaluate", "--hyp", "x"]) == 2

    def test_evaluate_on_files(self, tmp_path, capsys):
        hyp = str(tmp_path / "hyp.txt")
        ref = str(tmp_path / "ref.txt")
        write_lines(hyp, ["a b c d", "e f g h"])
        write_lines(ref, ["a b c d", "e f g h"])
        assert main(["evaluate", "--hyp", hyp, "--ref", ref]) == 0
        out = capsys.readouterr().out
        assert "BLEU=1.000000" in out

    def test_evaluate_length_mismatch_is_data_error(self, tmp_path, capsys):
        hyp = str(tmp_path / "hyp.txt")
        ref = str(tmp_path / "ref.txt")
        write_lines(hyp, ["a"])
        write_lines(ref, ["a", "b"])
        assert main(["evaluate", "--hyp", hyp, "--ref", ref]) == 4
        assert "error: data:" in capsys.readouterr().err

    def test_missing_file_is_data_error(self, tmp_path):
        assert main(
            ["evaluate", "--hyp", str(tmp_path / "no.txt"), "--ref",
             str(tmp_path / "no2.txt")]
        ) == 4

    def test_bad_config_value_is_config_error(self, tmp_path, capsys):
        hyp = str(tmp_path / "h.txt")
        write_lines(hyp, ["a"])
        assert main(
            ["evaluate", "--hyp", hyp, "--ref", hyp, "--beam-size", "-2"]
        ) == 3
        assert "error: config:" in capsys.readouterr().err

    def test_translate_line_count_preserved(self, tmp_path):
        sys_dir = str(tmp_path / "sys")
        identity_system(["a", "b", "c"]).save(sys_dir)
        inp = str(tmp_path / "in.txt")
        out = str(tmp_path / "out.txt")
        write_lines(inp, ["a b", "c", "b a c"])
        assert main(["translate", "--sys", sys_dir, "--in", inp, "--out", out]) == 0
        assert open(out).read().splitlines() == ["a b", "c", "b a c"]

    def test_translate_rerun_byte_identical(self, tmp_path):
        sys_dir = str(tmp_path / "sys")
        identity_system(["a", "b"]).save(sys_dir)
        inp = str(tmp_path / "in.txt")
        out = str(tmp_path / "out.txt")
        write_lines(inp, ["a b", "b"])
        assert main(["translate", "--sys", sys_dir, "--in", inp, "--out", out]) == 0
        first = open(out, "rb").read()
        assert main(["translate", "--sys", sys_dir, "--in", inp, "--out", out]) == 0
        assert open(out, "rb").read() == first

    def test_translate_does_not_mutate_input(self, tmp_path):
        sys_dir = str(tmp_path / "sys")
        identity_system(["a"]).save(sys_dir)
        inp = str(tmp_path / "in.txt")
        write_lines(inp, ["a a"])
        before = open(inp, "rb").read()
        main(["translate", "--sys", sys_dir, "--in", inp, "--out",
              str(tmp_path / "o.txt")])
        assert open(inp, "rb").read() == before

    def test_mbr_command(self, tmp_path):
        paths = []
        for k, text in enumerate((["a b c d"], ["a b c d"], ["x y z w"])):
            p = str(tmp_path / f"l{k}.txt")
            write_lines(p, text)
            paths.append(p)
        out = str(tmp_path / "mbr.txt")
        assert main(["mbr", "--lists", *paths, "--out", out]) == 0
        assert open(out).read() == "a b c d\n"

    def test_mbr_rejects_two_lists(self, tmp_path):
        paths = []
        for k in range(2):
            p = str(tmp_path / f"l{k}.txt")
            write_lines(p, ["a"])
            paths.append(p)
        assert main(["mbr", "--lists", *paths, "--out",
                     str(tmp_path / "o.txt")]) == 4

    def test_significance_command(self, tmp_path, capsys):
        a = str(tmp_path / "a.txt")
        ref = str(tmp_path / "ref.txt")
        write_lines(a, ["a b c d e"] * 3)
        write_lines(ref, ["a b c d e"] * 3)
        assert main(
            ["significance", "--a", a, "--b", a, "--ref", ref,
             "--samples", "50", "--seed", "9"]
        ) == 0
        out = capsys.readouterr().out
        assert "ties=50" in out and "winner=none" in out

    def test_rquantity_command(self, tmp_path, capsys):
        src = str(tmp_path / "s.txt")
        tgt = str(tmp_path / "t.txt")
        al = str(tmp_path / "a.txt")
        write_lines(src, ["a b", "c d"])
        write_lines(tgt, ["x y", "y x"])
        write_lines(al, ["0-0 1-1", "0-1 1-0"])
        assert main(["rquantity", "--src", src, "--tgt", tgt, "--align", al]) == 0
        assert "rquantity = 0.5" in capsys.readouterr().out

    def test_build_lm_writes_arpa_and_report(self, tmp_path):
        inp = str(tmp_path / "c.txt")
        out = str(tmp_path / "m.arpa")
        write_lines(inp, ["a b a", "b a b", "a a b b"])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            assert main(["build-lm", "--order", "2", "--in", inp, "--out", out]) == 0
        model = lm_mod.read_arpa(out)
        assert model.order == 2
        assert os.path.exists(out + ".report.txt")

    def test_align_build_tm_translate_chain(self, tmp_path):
        src = str(tmp_path / "c.src")
        tgt = str(tmp_path / "c.tgt")
        rows_src = ["a b", "b", "a", "b a"] * 3
        rows_tgt = ["x y", "y", "x", "y x"] * 3
        write_lines(src, rows_src)
        write_lines(tgt, rows_tgt)
        align_path = str(tmp_path / "align.txt")
        lf = str(tmp_path / "lex.fwd")
        lr = str(tmp_path / "lex.rev")
        assert main(
            ["align", "--src", src, "--tgt", tgt, "--out", align_path,
             "--lex-fwd-out", lf, "--lex-rev-out", lr]
        ) == 0
        assert len(open(align_path).read().splitlines()) == len(rows_src)
        table_path = str(tmp_path / "table.txt")
        reo_path = str(tmp_path / "reo.txt")
        assert main(
            ["build-tm", "--src", src, "--tgt", tgt, "--align", align_path,
             "--lex-fwd", lf, "--lex-rev", lr, "--out", table_path,
             "--reo-out", reo_path]
        ) == 0
        lm_path = str(tmp_path / "m.arpa")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            assert main(["build-lm", "--order", "2", "--in", tgt,
                         "--out", lm_path]) == 0
        # assemble a system directory by hand
        from pivotsmt.decoder import default_weights
        from pivotsmt.phrases import PhraseTable
        from pivotsmt.pivot import TranslationSystem
        from pivotsmt.decoder import DecoderConfig
        from pivotsmt.phrases import load_reordering

        system = TranslationSystem(
            table=PhraseTable.load(table_path),
            lm=lm_mod.read_arpa(lm_path),
            weights=default_weights(True),
            config=DecoderConfig(beam_size=20, nbest_size=5),
            reo_table=load_reordering(reo_path),
        )
        sys_dir = str(tmp_path / "sys")
        system.save(sys_dir)
        out = str(tmp_path / "out.txt")
        inp = str(tmp_path / "in.txt")
        write_lines(inp, ["a b", "b a"])
        assert main(["translate", "--sys", sys_dir, "--in", inp,
                     "--out", out]) == 0
        assert len(open(out).read().splitlines()) == 2

    def test_cascade_chaining_matches_two_translates(self, tmp_path):
        sp_dir = str(tmp_path / "sp")
        pt_dir = str(tmp_path / "pt")
        identity_system(["a", "b"]).save(sp_dir)
        identity_system(["a", "b"]).save(pt_dir)
        inp = str(tmp_path / "in.txt")
        write_lines(inp, ["a b", "b"])
        direct_out = str(tmp_path / "cascade.txt")
        assert main(
            ["cascade", "--sp-sys", sp_dir, "--pt-sys", pt_dir,
             "--in", inp, "--out", direct_out]
        ) == 0
        mid = str(tmp_path / "mid.txt")
        final = str(tmp_path / "chained.txt")
        assert main(["translate", "--sys", sp_dir, "--in", inp, "--out", mid]) == 0
        assert main(["translate", "--sys", pt_dir, "--in", mid, "--out", final]) == 0
        assert open(direct_out).read() == open(final).read()

    def test_pseudo_command(self, tmp_path):
        pt_dir = str(tmp_path / "pt")
        identity_system(["p", "q"]).save(pt_dir)
        src = str(tmp_path / "c.src")
        piv = str(tmp_path / "c.piv")
        write_lines(src, ["s1 s2", "s3"])
        write_lines(piv, ["p q", "q"])
        out_src = str(tmp_path / "o.src")
        out_tgt = str(tmp_path / "o.tgt")
        assert main(
            ["pseudo", "--sp-corpus", f"{src},{piv}", "--pt-sys", pt_dir,
             "--out", f"{out_src},{out_tgt}"]
        ) == 0
        assert open(out_src).read() == open(src).read()
        assert open(out_tgt).read() == open(piv).read()

    def test_triangulate_command(self, tmp_path):
        from pivotsmt.phrases import PhraseEntry, PhraseTable

        sp = PhraseTable()
        sp.entries[("s",)][("p",)] = PhraseEntry(1.0, 1.0, 1.0, 1.0, 1, 1, 1)
        pt = PhraseTable()
        pt.entries[("p",)][("t",)] = PhraseEntry(0.5, 0.5, 0.5, 0.5, 1, 1, 1)
        sp_path = str(tmp_path / "sp.txt")
        pt_path = str(tmp_path / "pt.txt")
        sp.save(sp_path)
        pt.save(pt_path)
        out = str(tmp_path / "tri.txt")
        assert main(["triangulate", "--sp", sp_path, "--pt", pt_path,
                     "--out", out]) == 0
        tri = PhraseTable.load(out)
        assert tri.entries[("s",)][("t",)].p_t_given_s == 0.5

    def test_prepare_command(self, tmp_path):
        prefix = str(tmp_path / "corpus")
        n = 12
        write_lines(prefix + ".src", [f"s{k} a b" for k in range(n)])
        write_lines(prefix + ".piv", [f"p{k} c d" for k in range(n)])
        write_lines(prefix + ".tgt", [f"t{k} e f" for k in range(n)])
        out_dir = str(tmp_path / "prepared")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            assert main(
                ["prepare", "--in", prefix, "--langs", "src,piv,tgt",
                 "--pivot-lang", "piv", "--out-dir", out_dir,
                 "--dev-size", "2", "--test-size", "2",
                 "--profile", "pretokenized", "--lm-order", "1"]
            ) == 0
        for part, count in (("train", 8), ("dev", 2), ("test", 2)):
            for lang in ("src", "piv", "tgt"):
                lines = open(os.path.join(out_dir, f"{part}.{lang}")).read().splitlines()
                assert len(lines) == count
        assert os.path.exists(os.path.join(out_dir, "report.txt"))
