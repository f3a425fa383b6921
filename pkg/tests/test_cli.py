import csv
import io
import json
import logging
import subprocess
import sys

import pytest

from mpec.cli import main, parse_grid
from mpec.config import RunConfig
from mpec.errors import ConfigError

SYNTH = {"classes": 3, "trials_per_class": 20, "channels": 4, "samples": 100, "separation": 2.0, "noise": 0.5, "seed": 1}
RUN = {"cluster": {"k": 2}, "mlp": {"hidden": 16, "epochs": 20}, "forest": {"trees": 10}}


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, out


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    (d / "synth.json").write_text(json.dumps(SYNTH))
    (d / "run.json").write_text(json.dumps(RUN))
    assert main(["synth", "--config", str(d / "synth.json"), "--out", str(d / "a.eegt")]) == 0
    assert main(["fit", str(d / "a.eegt"), "--config", str(d / "run.json"), "--out", str(d / "m.mpec")]) == 0
    return d


class TestSynth:
    def test_repeatable(self, workdir, tmp_path, capsys):
        code, out = run(capsys, "synth", "--config", workdir / "synth.json", "--out", tmp_path / "b.eegt")
        assert code == 0
        assert json.loads(out)["trials"] == 60
        assert (tmp_path / "b.eegt").read_bytes() == (workdir / "a.eegt").read_bytes()

    def test_seed_override(self, workdir, tmp_path, capsys):
        run(capsys, "synth", "--config", workdir / "synth.json", "--out", tmp_path / "c.eegt", "--seed", 2)
        assert (tmp_path / "c.eegt").read_bytes() != (workdir / "a.eegt").read_bytes()

    def test_missing_key(self, tmp_path, capsys, caplog):
        doc = dict(SYNTH)
        del doc["classes"]
        (tmp_path / "bad.json").write_text(json.dumps(doc))
        with caplog.at_level(logging.ERROR, logger="mpec"):
            code, _ = run(capsys, "synth", "--config", tmp_path / "bad.json", "--out", tmp_path / "x")
        assert code == 2
        assert "classes" in caplog.text


class TestFit:
    def test_report(self, workdir, tmp_path, capsys):
        code, out = run(
            capsys, "fit", workdir / "a.eegt", "--config", workdir / "run.json", "--out", tmp_path / "m", "--timings"
        )
        assert code == 0
        report = json.loads(out)
        assert sum(report["cluster_sizes"]) == report["n_train"] == 48
        assert 0.0 <= report["accuracy"] <= 1.0
        assert 0.0 <= report["cv_accuracy"] <= 1.0
        assert report["config_sha256"] == RunConfig.from_dict(RUN).digest()
        assert "timings" in report

    def test_timings_not_in_default_report(self, workdir, tmp_path, capsys):
        _, out = run(capsys, "fit", workdir / "a.eegt", "--config", workdir / "run.json", "--out", tmp_path / "m", "--no-cv")
        report = json.loads(out)
        assert "timings" not in report and "cv_accuracy" not in report

    def test_k_too_large(self, workdir, tmp_path, capsys):
        (tmp_path / "big.json").write_text(json.dumps({"cluster": {"k": 500}}))
        code, _ = run(capsys, "fit", workdir / "a.eegt", "--config", tmp_path / "big.json", "--out", tmp_path / "m")
        assert code == 3

    def test_bad_archive(self, tmp_path, capsys):
        (tmp_path / "junk").write_bytes(b"JUNKJUNKJUNKJUNKJUNK")
        code, _ = run(capsys, "fit", tmp_path / "junk", "--out", tmp_path / "m")
        assert code == 3

    def test_missing_archive(self, tmp_path, capsys):
        code, _ = run(capsys, "fit", tmp_path / "nothing", "--out", tmp_path / "m")
        assert code == 3

    def test_bad_config(self, workdir, tmp_path, capsys):
        (tmp_path / "c.json").write_text(json.dumps({"cluster": {"w1": 2.0}}))
        code, _ = run(capsys, "fit", workdir / "a.eegt", "--config", tmp_path / "c.json", "--out", tmp_path / "m")
        assert code == 2


class TestEvalPredict:
    def test_eval_json(self, workdir, capsys):
        code, out = run(capsys, "eval", workdir / "a.eegt", "--model", workdir / "m.mpec")
        assert code == 0
        report = json.loads(out)
        assert report["n_test"] == 12
        assert [row[0] for row in report["table"]] == ["SVM", "LR", "MLP", "Random Forest", "MPEC (ensemble)"]
        assert report["table_columns"] == ["model", "precision", "recall", "f1", "accuracy"]
        assert report["accuracy"] >= 0.8

    def test_eval_csv_and_per_class(self, workdir, tmp_path, capsys):
        code, out = run(
            capsys, "eval", workdir / "a.eegt", "--model", workdir / "m.mpec", "--format", "csv", "--out", tmp_path / "pc.csv"
        )
        assert code == 0
        table = list(csv.reader(io.StringIO(out)))
        assert len(table) == 6
        per_class = list(csv.reader(open(tmp_path / "pc.csv")))
        assert per_class[0] == ["class", "precision", "recall", "f1", "support"]
        assert len(per_class) == SYNTH["classes"] + 1

    def test_split_seed_mismatch_warns(self, workdir, capsys):
        with pytest.warns(UserWarning, match="split-seed"):
            code, _ = run(capsys, "eval", workdir / "a.eegt", "--model", workdir / "m.mpec", "--split-seed", 99)
        assert code == 0

    @pytest.mark.parametrize("fmt", ["json", "csv"])
    def test_predict(self, workdir, capsys, fmt):
        code, out = run(capsys, "predict", workdir / "a.eegt", "--model", workdir / "m.mpec", "--format", fmt)
        assert code == 0
        if fmt == "json":
            assert len(json.loads(out)["predictions"]) == 60
        else:
            assert len(out.strip().splitlines()) == 61


class TestGridsearch:
    def test_single_cell_matches_fit_cv(self, workdir, tmp_path, capsys):
        (tmp_path / "g.json").write_text(json.dumps({"k": [2]}))
        code, out = run(capsys, "gridsearch", workdir / "a.eegt", "--config", workdir / "run.json", "--grid", tmp_path / "g.json")
        assert code == 0
        cells = json.loads(out)["cells"]
        assert len(cells) == 1
        _, fit_out = run(capsys, "fit", workdir / "a.eegt", "--config", workdir / "run.json", "--out", tmp_path / "m")
        assert cells[0]["cv_accuracy"] == json.loads(fit_out)["cv_accuracy"]

    def test_ranked_and_repeatable(self, workdir, tmp_path, capsys):
        (tmp_path / "g.json").write_text(json.dumps({"fusion_weights": [[0.5, 0.5], [0.0, 1.0]]}))
        argv = ("gridsearch", workdir / "a.eegt", "--config", workdir / "run.json", "--grid", tmp_path / "g.json")
        _, first = run(capsys, *argv)
        _, second = run(capsys, *argv)
        assert first == second
        scores = [c["cv_accuracy"] for c in json.loads(first)["cells"]]
        assert len(scores) == 2 and scores == sorted(scores, reverse=True)

    @pytest.mark.parametrize(
        "grid",
        [{"fusion_weights": [[0.6, 0.6]]}, {"cluster_weights": []}, {"k": []}, {"alpha": [1]}, {"k": [0]}],
    )
    def test_rejected(self, workdir, tmp_path, capsys, grid):
        (tmp_path / "g.json").write_text(json.dumps(grid))
        code, _ = run(capsys, "gridsearch", workdir / "a.eegt", "--grid", tmp_path / "g.json")
        assert code == 2

    def test_sweep(self):
        cells = parse_grid({"cluster_weights": "sweep"}, RunConfig())
        assert len(cells) == 11
        assert all(abs(sum(c[1]) - 1) < 1e-12 for c in cells)
        with pytest.raises(ConfigError):
            parse_grid({"cluster_weights": "all"}, RunConfig())


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "mpec", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    assert "gridsearch" in out.stdout


def test_usage_error_exit_code():
    out = subprocess.run([sys.executable, "-m", "mpec", "fit"], capture_output=True, text=True)
    assert out.returncode == 2
