import json

import pytest

from docmt import read_records, write_records
from docmt.cli import dispatch
from helpers import make_corpus


@pytest.fixture
def corpus_file(tmp_path):
    path = tmp_path / "corpus.jsonl"
    write_records(make_corpus([8, 3]), path)
    return path


def run(*argv):
    return dispatch([str(a) for a in argv])


class TestDispatch:
    def test_unknown_subcommand_is_usage_error(self, capsys):
        assert run("frobnicate") == 2
        assert "usage" in capsys.readouterr().err.lower()

    def test_no_arguments_is_usage_error(self):
        assert run() == 2

    def test_missing_required_flag_is_usage_error(self, corpus_file, tmp_path):
        assert run("oversample", "--in", corpus_file, "--out", tmp_path / "o") == 2

    def test_help_exits_zero(self):
        assert run("--help") == 0

    def test_missing_input_file_is_validation_error(self, tmp_path, capsys):
        code = run("mr-split", "--in", tmp_path / "absent.jsonl", "--out", tmp_path / "out")
        assert code == 1
        assert "error:" in capsys.readouterr().err


class TestConvert:
    def test_round_trip_through_both_formats(self, tmp_path, corpus_file):
        assert (
            run(
                "convert", "--to", "doc-text", "--in", corpus_file,
                "--src-out", tmp_path / "s.txt", "--tgt-out", tmp_path / "t.txt",
            )
            == 0
        )
        assert (
            run(
                "convert", "--to", "records", "--src", tmp_path / "s.txt",
                "--tgt", tmp_path / "t.txt", "--out", tmp_path / "back.jsonl",
            )
            == 0
        )
        assert read_records(tmp_path / "back.jsonl") == read_records(corpus_file)

    def test_incomplete_flags_are_validation_error(self, tmp_path):
        assert run("convert", "--to", "records", "--out", tmp_path / "x") == 1


class TestClean:
    def test_flags_and_report(self, tmp_path):
        corpus = tmp_path / "c.jsonl"
        corpus.write_text(
            '{"doc_id":"d0","src":["hello there"],"tgt":["bonjour"]}\n'
            '{"doc_id":"d1","src":["HELLO  THERE"],"tgt":["salut"]}\n'
            '{"doc_id":"d2","src":["other text"],"tgt":["autre"]}\n',
            encoding="utf-8",
        )
        scores = tmp_path / "scores.jsonl"
        scores.write_text(
            '{"doc_id":"d0","pair_index":0,"score":0.9}\n'
            '{"doc_id":"d2","pair_index":0,"score":0.39}\n',
            encoding="utf-8",
        )
        out = tmp_path / "clean.jsonl"
        report = tmp_path / "removed.jsonl"
        code = run(
            "clean", "--in", corpus, "--out", out, "--dedup", "--fix-punct", ".",
            "--align-scores", scores, "--align-threshold", "0.40",
            "--report", report,
        )
        assert code == 0
        cleaned = read_records(out)
        assert [d.doc_id for d in cleaned] == ["d0"]
        assert cleaned[0].source.sentences == ("hello there.",)
        rows = [json.loads(line) for line in report.read_text().splitlines()]
        assert {row["doc_id"] for row in rows} == {"d1", "d2"}
        assert (tmp_path / "clean.jsonl.manifest.json").exists()


class TestMrSplit:
    def test_eight_sentence_fixture_gives_fifteen_pairs(self, tmp_path):
        src = tmp_path / "c.jsonl"
        write_records(make_corpus([8]), src)
        out = tmp_path / "mr.jsonl"
        assert run("mr-split", "--in", src, "--out", out) == 0
        assert len(read_records(out)) == 15
        manifest = json.loads((tmp_path / "mr.jsonl.manifest.json").read_text())
        assert manifest["command"] == "mr-split"
        assert str(src) in manifest["input_digests"]
        assert str(out) in manifest["output_digests"]

    def test_no_singletons_flag(self, tmp_path):
        src = tmp_path / "c.jsonl"
        write_records(make_corpus([6]), src)
        out = tmp_path / "mr.jsonl"
        assert run("mr-split", "--in", src, "--out", out, "--no-singletons") == 0
        assert len(read_records(out)) == 7  # levels 1 + 2 + 4


class TestOversampleAndBucket:
    def test_oversample(self, corpus_file, tmp_path):
        out = tmp_path / "os.jsonl"
        assert run("oversample", "--in", corpus_file, "--out", out, "--factor", "6") == 0
        assert len(read_records(out)) == 12

    def test_bucket_writes_one_file_per_budget(self, corpus_file, tmp_path):
        prefix = tmp_path / "bucket"
        assert run("bucket", "--in", corpus_file, "--out-prefix", prefix, "--budgets", "4,64") == 0
        small = read_records(f"{prefix}.b4.jsonl")
        large = read_records(f"{prefix}.b64.jsonl")
        assert len(small) >= len(large)
        assert (tmp_path / "bucket.b4.jsonl.manifest.json").exists()


class TestMetricsCommands:
    def test_bleu_identity_prints_100(self, tmp_path, capsys):
        hyp = tmp_path / "hyp.txt"
        hyp.write_text("the cat sat.\nthen it left.\n\nanother doc.\n", encoding="utf-8")
        assert run("bleu", "--hyp", hyp, "--ref", hyp, "--level", "doc") == 0
        assert "100.00" in capsys.readouterr().out

    def test_bleu_structure_mismatch_is_validation_error(self, tmp_path, capsys):
        hyp = tmp_path / "hyp.txt"
        ref = tmp_path / "ref.txt"
        hyp.write_text("a.\nb.\n", encoding="utf-8")
        ref.write_text("a.\n", encoding="utf-8")
        assert run("bleu", "--hyp", hyp, "--ref", ref, "--level", "sent") == 1
        assert "document 0" in capsys.readouterr().err

    def test_tcp_command(self, tmp_path, capsys):
        ref = tmp_path / "ref.txt"
        ref.write_text("he went home and slept.\n", encoding="utf-8")
        hyp = tmp_path / "hyp.txt"
        hyp.write_text("he went home and slept.\n", encoding="utf-8")
        labels = tmp_path / "labels.jsonl"
        labels.write_text(
            '{"doc_id":"000000","word":"went","position":1,"category":"TENSE"}\n'
            '{"doc_id":"000000","word":"and","position":3,"category":"CONJ"}\n'
            '{"doc_id":"000000","word":"he","position":0,"category":"PRON"}\n',
            encoding="utf-8",
        )
        assert run("tcp", "--hyp", hyp, "--ref", ref, "--labels", labels) == 0
        out = capsys.readouterr().out
        assert "TC = 100.0" in out
        assert "TCP = 100.0" in out

    def test_pearson_command(self, tmp_path, capsys):
        (tmp_path / "x.txt").write_text("1\n2\n3\n", encoding="utf-8")
        (tmp_path / "y.txt").write_text("1\n3\n2\n", encoding="utf-8")
        assert run("pearson", "--x", tmp_path / "x.txt", "--y", tmp_path / "y.txt") == 0
        assert "0.5000" in capsys.readouterr().out


class TestShuffleCommand:
    def test_requires_seed(self, corpus_file, tmp_path):
        assert run("shuffle", "--in", corpus_file, "--out", tmp_path / "s", "--mode", "local") == 2

    def test_reproducible_and_invertible(self, corpus_file, tmp_path):
        out1 = tmp_path / "s1.jsonl"
        out2 = tmp_path / "s2.jsonl"
        for out in (out1, out2):
            assert (
                run("shuffle", "--in", corpus_file, "--out", out, "--mode", "global",
                    "--seed", "42")
                == 0
            )
        assert out1.read_bytes() == out2.read_bytes()
        from docmt import unshuffle
        from docmt.harness import read_permutation_records

        records = read_permutation_records(tmp_path / "s1.jsonl.perm.jsonl")
        assert unshuffle(read_records(out1), records) == read_records(corpus_file)


class TestContrastiveCommand:
    def test_accuracy_report(self, tmp_path, capsys):
        (tmp_path / "inst.jsonl").write_text(
            '{"instance_id":"i0","source":"s","candidates":["good","bad"],'
            '"positive_index":0,"phenomenon":"deixis"}\n'
            '{"instance_id":"i1","source":"s","candidates":["good","bad"],'
            '"positive_index":0,"phenomenon":"deixis"}\n',
            encoding="utf-8",
        )
        (tmp_path / "scores.jsonl").write_text(
            '{"instance_id":"i0","candidate_index":0,"score":1.0}\n'
            '{"instance_id":"i0","candidate_index":1,"score":0.0}\n'
            '{"instance_id":"i1","candidate_index":0,"score":0.0}\n'
            '{"instance_id":"i1","candidate_index":1,"score":1.0}\n',
            encoding="utf-8",
        )
        assert (
            run("contrastive", "--instances", tmp_path / "inst.jsonl",
                "--scores", tmp_path / "scores.jsonl")
            == 0
        )
        out = capsys.readouterr().out
        assert "deixis = 50.0 (1/2)" in out
        assert "overall = 50.0 (1/2)" in out


class TestReportCommand:
    def metric_file(self, tmp_path, name, values):
        path = tmp_path / f"{name}.jsonl"
        rows = [
            {"name": metric, "value": value, "numerator": 0, "denominator": 0}
            for metric, value in values.items()
        ]
        path.write_text(
            "".join(json.dumps(row) + "\n" for row in rows), encoding="utf-8"
        )
        return path

    def test_tcp_recomputed_from_components(self, tmp_path, capsys):
        path = self.metric_file(
            tmp_path,
            "system-a",
            {"d-BLEU": 27.80, "TC": 56.9, "CP": 25.7, "PT": 63.9, "TCP": 99.9},
        )
        assert run("report", path) == 0
        out = capsys.readouterr().out
        row = next(line for line in out.splitlines() if "system-a" in line)
        assert "45.4" in row  # recomputed, the bogus stored 99.9 is ignored
        assert "99.9" not in row

    def test_rows_preserve_input_order(self, tmp_path, capsys):
        a = self.metric_file(tmp_path, "sys-a", {"TC": 50.0, "CP": 50.0, "PT": 50.0})
        b = self.metric_file(tmp_path, "sys-b", {"TC": 60.0, "CP": 60.0, "PT": 60.0})
        assert run("report", b, a) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[1].startswith("sys-b")
        assert lines[2].startswith("sys-a")
        assert "50.0" in lines[2]

    def test_missing_metric_renders_dash(self, tmp_path, capsys):
        path = self.metric_file(tmp_path, "partial", {"TC": 50.0})
        assert run("report", path) == 0
        row = capsys.readouterr().out.splitlines()[1]
        assert "-" in row
