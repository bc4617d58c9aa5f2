import csv
import json

import numpy as np
import pytest

from forlap import evaluation
from forlap.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, OUTPUT_ENV, main
from forlap.errors import NumericalError
from forlap.simulate import simulate


def _read_dir(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


@pytest.fixture
def series_csv(tmp_path):
    p = tmp_path / "abml.csv"
    x = np.cumsum(np.cumsum(simulate("K", 3)))
    rows = ["quarter,value"] + [f"{1980 + i // 4} Q{i % 4 + 1},{float(v)!r}" for i, v in enumerate(x)]
    p.write_text("\n".join(rows) + "\n")
    return p


def test_forecast_from_csv(tmp_path, series_csv):
    out = tmp_path / "out"
    rc = main(["forecast", "--input", str(series_csv), "--difference", "2", "--integrate",
               "--horizon", "2", "--output-dir", str(out)])
    assert rc == EXIT_OK
    rep = json.loads((out / "forecast.json").read_text())
    assert len(rep["points"]) == 2 and len(rep["level_points"]) == 2
    assert rep["preprocessing"]["difference"]["order"] == 2
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "ok" and "numpy" in manifest["versions"]
    assert "Philox" in manifest["seeds"]["rng"]


def test_backtest_model_k_and_plot_data(tmp_path):
    out = tmp_path / "bt"
    rc = main(["backtest", "--model", "K", "--seed", "4", "--last-n", "50", "--level", "95",
               "--output-dir", str(out)])
    assert rc == EXIT_OK
    rep = json.loads((out / "backtest.json").read_text())
    for m in ("forlap", "ar"):
        assert 0 <= rep["methods"][m]["success_percentage"] <= 100
    with open(out / "plot_forlap.tsv") as fh:
        rows = list(csv.DictReader(fh, delimiter="\t"))
    assert len(rows) == 50
    r = rows[0]
    assert float(r["truth_ssqrt"]) == pytest.approx(np.sign(float(r["truth"])) * abs(float(r["truth"])) ** 0.5)


def test_table_schema(tmp_path):
    out = tmp_path / "tab"
    rc = main(["table", "--models", "A", "--methods", "ar,forlap", "--replications", "2",
               "--last-n", "3", "--output-dir", str(out)])
    assert rc == EXIT_OK
    with open(out / "table.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["model", "method", "40", "50", "60", "70", "80", "90", "MCR", "MIS"]
    assert rows[1][1] == "AR-AIC" and rows[1][-1] == ""
    assert rows[2][1] == "FORLAP" and float(rows[2][-1]) > 0


def test_simulate_and_lpacf(tmp_path):
    out = tmp_path / "sim"
    assert main(["simulate", "--model", "M", "--replications", "2", "--output-dir", str(out)]) == EXIT_OK
    with open(out / "simulate.csv") as fh:
        assert sum(1 for _ in fh) == 1 + 2 * 350
    out2 = tmp_path / "lp"
    assert main(["lpacf", "--model", "D", "--z", "0.5", "--output-dir", str(out2)]) == EXIT_OK
    rep = json.loads((out2 / "lpacf.json").read_text())
    assert rep["p_selected"] >= 1 and len(rep["lpacf"]) == len(rep["ci_halfwidth"])


def test_byte_identical_reruns(tmp_path):
    args = ["backtest", "--model", "L", "--seed", "2", "--last-n", "10", "--methods", "forlap,es"]
    assert main(args + ["--output-dir", str(tmp_path / "a")]) == EXIT_OK
    assert main(args + ["--output-dir", str(tmp_path / "b")]) == EXIT_OK
    assert _read_dir(tmp_path / "a") == _read_dir(tmp_path / "b")


def test_aggregated_config_errors(tmp_path, capsys):
    rc = main(["backtest", "--model", "Q", "--alpha", "3", "--methods", "forlap,fvbvs",
               "--output-dir", str(tmp_path)])
    assert rc == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "--model" in err and "--alpha" in err and "--fvbvs-m" in err


def test_insufficient_history_is_config_error(tmp_path):
    rc = main(["backtest", "--model", "A", "--last-n", "120", "--output-dir", str(tmp_path / "f")])
    assert rc == EXIT_CONFIG
    failure = json.loads((tmp_path / "f" / "failure.json").read_text())
    assert failure["status"] == "failed" and failure["error"]["kind"] == "config"


def test_numerical_failure_exit_code(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise NumericalError("synthetic", stage="solve_gyw")

    monkeypatch.setitem(evaluation.METHODS, "forlap", boom)
    rc = main(["forecast", "--model", "A", "--output-dir", str(tmp_path / "n")])
    assert rc == EXIT_NUMERICAL
    failure = json.loads((tmp_path / "n" / "failure.json").read_text())
    assert failure["error"]["stage"] == "solve_gyw"


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "env"))
    assert main(["simulate", "--model", "A"]) == EXIT_OK
    assert (tmp_path / "env" / "simulate.csv").exists()


def test_ingest_error_exit(tmp_path):
    p = tmp_path / "two.csv"
    p.write_text("a,b\n1,2\n3,4\n")
    assert main(["forecast", "--input", str(p), "--output-dir", str(tmp_path / "o")]) == EXIT_CONFIG


def test_rerun_from_manifest(tmp_path):
    assert main(["simulate", "--model", "C", "--seed", "9", "--output-dir", str(tmp_path / "a")]) == EXIT_OK
    assert main(["rerun", str(tmp_path / "a" / "manifest.json"), "--output-dir", str(tmp_path / "b")]) == EXIT_OK
    assert _read_dir(tmp_path / "a") == _read_dir(tmp_path / "b")


def test_rerun_bad_manifest(tmp_path):
    bad = tmp_path / "m.json"
    bad.write_text("{}")
    assert main(["rerun", str(bad), "--output-dir", str(tmp_path / "o")]) == EXIT_CONFIG
