import json
import subprocess
import sys

import pytest
import yaml

from hfm.cli import RunConfig, config_from_report, main, render, run, strip_timing
from hfm.ingest import read_csv

TOY_CSV = "x,s,y\n0,a,0\n0.1,a,0\n0.5,b,0\n1,b,1\n"


@pytest.fixture
def toy_manifest(tmp_path):
    (tmp_path / "toy.csv").write_text(TOY_CSV, encoding="utf-8")
    path = tmp_path / "toy.yaml"
    path.write_text(yaml.safe_dump({
        "csv_path": "toy.csv",
        "label_column": "y",
        "positive_label": "1",
        "sensitive": [{"column": "s", "values": ["a", "b"], "privileged": "a"}],
    }), encoding="utf-8")
    return path


def run_main(capsys, *argv):
    status = main(list(argv))
    out, err = capsys.readouterr()
    return status, out, err


def test_exact_on_toy(capsys, toy_manifest):
    status, out, _ = run_main(capsys, "exact", "--manifest", str(toy_manifest), "--workers", "1")
    assert status == 0
    report = json.loads(out)
    assert report["report_version"] == "1.0.0"
    assert report["result"]["distance"]["aggregate_max"] == pytest.approx(1.3453624, abs=1e-7)
    assert report["result"]["dataset_stats"]["n_instances"] == 4


def test_approx_auto_m2_resolved(capsys):
    status, out, _ = run_main(capsys, "approx", "--synthetic", "1000", "--m1", "2", "--m2", "auto", "--workers", "1")
    assert status == 0
    report = json.loads(out)
    assert report["config"]["m2"] == 6
    assert report["result"]["distance"]["m2"] == 6


def test_hfm_with_label_predictions(capsys, toy_manifest, tmp_path):
    preds = tmp_path / "p.txt"
    preds.write_text("0\n0\n0\n1\n", encoding="utf-8")
    for method in ("exact", "approx"):
        status, out, _ = run_main(capsys, "hfm", "--manifest", str(toy_manifest), "--predictions", str(preds),
                                  "--method", method, "--workers", "1")
        assert status == 0
        fairness = json.loads(out)["result"]["fairness"]
        assert fairness["df"] == 0.0 and fairness["df_avg"] == 0.0


def test_baselines_with_perturbed(capsys, toy_manifest, tmp_path):
    preds = tmp_path / "p.txt"
    preds.write_text("0\n1\n0\n1\n", encoding="utf-8")
    flipped = tmp_path / "q.txt"
    flipped.write_text("0\n1\n0\n0\n", encoding="utf-8")
    status, out, _ = run_main(capsys, "baselines", "--manifest", str(toy_manifest), "--predictions", str(preds),
                              "--perturbed", str(flipped), "--workers", "1")
    assert status == 0
    result = json.loads(out)["result"]
    assert result["dr_avg"] == 0.25
    assert result["per_attribute"][0]["dp"] == 0.0


def test_config_error_exit_code(capsys):
    status, out, err = run_main(capsys, "exact")
    assert status == 2 and out == ""
    assert json.loads(err)["error"]["code"] == "config_error"


def test_data_error_exit_code(capsys, toy_manifest, tmp_path):
    preds = tmp_path / "p.txt"
    preds.write_text("0\n0\n0\n", encoding="utf-8")
    status, _, err = run_main(capsys, "hfm", "--manifest", str(toy_manifest), "--predictions", str(preds))
    assert status == 3
    assert json.loads(err)["error"]["code"] == "dimension_mismatch"


def test_degenerate_exit_code(capsys, tmp_path):
    (tmp_path / "d.csv").write_text("x,s,y\n0,a,0\n1,a,1\n", encoding="utf-8")
    path = tmp_path / "d.yaml"
    path.write_text(yaml.safe_dump({
        "csv_path": "d.csv", "label_column": "y",
        "sensitive": [{"column": "s", "values": ["a", "b"], "privileged": "a"}],
    }), encoding="utf-8")
    status, _, err = run_main(capsys, "exact", "--manifest", str(path))
    assert status == 4
    assert json.loads(err)["error"]["code"] == "degenerate_attribute"


def test_csv_round_trip(capsys, tmp_path):
    out_path = tmp_path / "rows.csv"
    status, _, _ = run_main(capsys, "approx", "--synthetic", "200", "--m1", "3", "--workers", "1",
                            "--format", "csv", "--out", str(out_path))
    assert status == 0
    frame = read_csv(out_path)
    assert list(frame.columns) == ["attr", "d_max", "d_avg", "method", "channel"]
    _, report = run(RunConfig(command="approx", synthetic_n=200, m1=3, workers=1))
    expected = report["result"]["distance"]["per_attribute"]
    assert frame["d_max"].tolist() == [a["d_max"] for a in expected]
    assert frame["d_avg"].tolist() == [a["d_avg"] for a in expected]


@pytest.mark.parametrize("command,extra", [
    ("exact", {}),
    ("approx", {"m1": 4}),
    ("hfm", {"m1": 3}),
    ("validate-lemma1", {"cases": 2, "samples": 10_000}),
    ("prop1", {"n": 1000, "k": 2, "mu": 0.01, "m1": 3}),
    ("advise-params", {"n": 1000, "k": 9, "m2": 20}),
])
def test_rerun_from_embedded_config(command, extra):
    cfg = RunConfig(command=command, synthetic_n=150, workers=1, **extra)
    status, first = run(cfg)
    assert status == 0
    text = render(first, "json")
    status, second = run(config_from_report(json.loads(text)))
    assert status == 0
    assert strip_timing(json.loads(render(second, "json"))) == strip_timing(json.loads(text))


def test_advise_params_values(capsys):
    status, out, _ = run_main(capsys, "advise-params", "--n", "1000", "--k", "9", "--m1", "25", "--m2", "20")
    assert status == 0
    result = json.loads(out)["result"]
    assert result["lam"] == pytest.approx(25.0257, abs=1e-4)
    assert result["suggested_m2"] == 6


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "hfm", "advise-params", "--n", "100", "--k", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["suggested_m2"] == 4
