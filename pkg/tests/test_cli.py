import json
import os

import pytest

import jointnlu
from jointnlu.cli import main
from jointnlu.corpus import parse_corpus

TOY = str(jointnlu.toy_corpus_path())

TINY_CONFIG = """[common]
epochs = 2
batch_size = 8
seed = 5

[unified]
hidden = 6
embedding_dim = 6

[bilstm-crf]
hidden = 6
embedding_dim = 6
"""


def run(argv):
    return main(argv)


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "tiny.ini"
    path.write_text(TINY_CONFIG, encoding="utf-8")
    return str(path)


def train_unified(tmp_path, config_path, out_name="run", seed=None):
    out = str(tmp_path / out_name)
    argv = ["train", "--model", "unified", "--corpus", TOY,
            "--config", config_path, "--out", out]
    if seed is not None:
        argv += ["--seed", str(seed)]
    assert run(argv) == 0
    return out


class TestDataStats:
    def test_toy_corpus(self, capsys):
        assert run(["data-stats", "--corpus", TOY]) == 0
        out = capsys.readouterr().out
        assert "sentences: 32" in out
        assert "intent_labels: 4" in out
        assert "tag_labels: 10" in out

    def test_missing_corpus(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run(["data-stats", "--corpus", str(tmp_path / "nope.iob")])
        assert exc.value.code == 2


class TestTrain:
    def test_writes_artifacts(self, tmp_path, config_path):
        out = train_unified(tmp_path, config_path)
        assert os.path.isdir(os.path.join(out, "checkpoint"))
        assert os.path.exists(os.path.join(out, "epochs.log"))
        manifest = json.load(open(os.path.join(out, "run.json")))
        assert manifest["model"] == "unified"
        assert manifest["seed"] == 5
        assert len(manifest["corpus"]["sha256"]) == 64
        with open(os.path.join(out, "epochs.log")) as fh:
            entries = [json.loads(line) for line in fh]
        assert len(entries) == 2
        assert "train_loss" in entries[0]

    def test_missing_corpus_usage_error(self, tmp_path, config_path):
        with pytest.raises(SystemExit) as exc:
            run(["train", "--model", "unified", "--corpus",
                 str(tmp_path / "nope.iob"), "--config", config_path,
                 "--out", str(tmp_path / "o")])
        assert exc.value.code == 2

    def test_unknown_config_key(self, tmp_path):
        bad = tmp_path / "bad.ini"
        bad.write_text("[common]\nwarp_speed = 9\n", encoding="utf-8")
        code = run(["train", "--model", "unified", "--corpus", TOY,
                    "--config", str(bad), "--out", str(tmp_path / "o")])
        assert code == 2

    def test_byte_identical_checkpoints(self, tmp_path, config_path):
        a = train_unified(tmp_path, config_path, "a", seed=9)
        b = train_unified(tmp_path, config_path, "b", seed=9)
        for name in ("manifest", "params.bin"):
            pa = open(os.path.join(a, "checkpoint", name), "rb").read()
            pb = open(os.path.join(b, "checkpoint", name), "rb").read()
            assert pa == pb


class TestEvaluate:
    def test_metrics_files(self, tmp_path, config_path, capsys):
        out = train_unified(tmp_path, config_path)
        capsys.readouterr()  # drop the training output
        metrics_dir = str(tmp_path / "metrics")
        code = run(["evaluate", "--checkpoint", os.path.join(out, "checkpoint"),
                    "--corpus", TOY, "--out", metrics_dir])
        assert code == 0
        text = capsys.readouterr().out
        assert text.startswith("precision: ")
        report = json.load(open(os.path.join(metrics_dir, "metrics.json")))
        for key in ("precision", "recall", "f1", "intent_accuracy",
                    "token_accuracy", "overall_accuracy"):
            assert 0.0 <= report[key] <= 1.0
        assert os.path.exists(os.path.join(metrics_dir, "metrics.txt"))

    def test_vocab_mismatch(self, tmp_path, config_path):
        out = train_unified(tmp_path, config_path)
        alien = tmp_path / "alien.iob"
        alien.write_text("#intent=warp\nengage\tB-warp_factor\n", encoding="utf-8")
        with pytest.raises(SystemExit) as exc:
            run(["evaluate", "--checkpoint", os.path.join(out, "checkpoint"),
                 "--corpus", str(alien)])
        assert exc.value.code == 2


class TestPredict:
    def test_round_trips_through_parser(self, tmp_path, config_path, capsys):
        out = train_unified(tmp_path, config_path)
        capsys.readouterr()  # drop the training output
        code = run(["predict", "--checkpoint", os.path.join(out, "checkpoint"),
                    "--text", "show flights from boston to denver"])
        assert code == 0
        printed = capsys.readouterr().out
        pred_file = tmp_path / "pred.iob"
        pred_file.write_text(printed, encoding="utf-8")
        parsed = parse_corpus(str(pred_file))
        assert len(parsed) == 1
        assert parsed.sentences[0].tokens == (
            "show", "flights", "from", "boston", "to", "denver")

    def test_empty_lines_skipped(self, tmp_path, config_path, capsys, caplog):
        out = train_unified(tmp_path, config_path)
        inp = tmp_path / "input.txt"
        inp.write_text("show flights\n\nbook a room\n", encoding="utf-8")
        code = run(["predict", "--checkpoint", os.path.join(out, "checkpoint"),
                    "--input", str(inp)])
        assert code == 0
        printed = capsys.readouterr().out
        assert printed.count("#intent=") == 2

    def test_language_normalization(self, tmp_path, config_path, capsys):
        out = train_unified(tmp_path, config_path)
        code = run(["predict", "--checkpoint", os.path.join(out, "checkpoint"),
                    "--text", "SHOW Flights", "--language", "en"])
        assert code == 0
        printed = capsys.readouterr().out
        assert "show\t" in printed and "SHOW" not in printed


class TestGradcheck:
    def test_single_kind_exits_zero(self, capsys):
        assert run(["gradcheck", "--model", "svm"]) == 0
        out = capsys.readouterr().out
        assert "svm: max relative error" in out
        assert "PASS" in out

    def test_same_seed_same_report(self, capsys):
        run(["gradcheck", "--model", "svm", "--seed", "3"])
        first = capsys.readouterr().out
        run(["gradcheck", "--model", "svm", "--seed", "3"])
        second = capsys.readouterr().out
        assert first == second

    def test_corrupted_gradient_fails(self, monkeypatch, capsys):
        # force a wrong analytic gradient through the svm objective path
        from jointnlu.models import gradcheck as gc
        from jointnlu.numerics import FiniteDiffReport

        real = gc.finite_diff_check

        def corrupted(loss_fn, params, step=1e-4, tolerance=1e-4):
            report = real(loss_fn, params, step=step, tolerance=tolerance)
            errors = dict(report.errors)
            errors[sorted(errors)[0]] = 0.5  # simulate a broken backward
            return FiniteDiffReport(errors, tolerance)

        monkeypatch.setattr(gc, "finite_diff_check", corrupted)
        assert run(["gradcheck", "--model", "svm"]) == 1
        assert "FAIL" in capsys.readouterr().out
