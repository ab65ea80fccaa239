import csv
import json

import numpy as np
import pytest

from dripp.cli import main
from dripp.commands.utils import EXIT_IO, EXIT_VALIDATION
from dripp.services.event_io import read_events, read_fit_report


@pytest.fixture
def run(tmp_path, monkeypatch):
    monkeypatch.delenv("DRIPP_OUTPUT_DIR", raising=False)
    monkeypatch.delenv("DRIPP_JOBS", raising=False)
    config = tmp_path / "none.toml"

    def invoke(*argv):
        main(["-c", str(config), *[str(arg) for arg in argv]])

    return invoke


@pytest.fixture
def simulated(tmp_path, run):
    out = tmp_path / "sim"
    run("simulate", "--duration", 200, "--seed", 1, "--out-dir", out)
    return out


def test_simulate_is_reproducible(tmp_path, run, simulated):
    again = tmp_path / "again"
    run("simulate", "--duration", 200, "--seed", 1, "--out-dir", again)
    for name in ["drivers.csv", "events.csv", "params.json"]:
        assert (simulated / name).read_bytes() == (again / name).read_bytes()
    assert read_events(simulated / "events.csv").duration == 200.0


def test_fit_is_reproducible(tmp_path, run, simulated, capsys):
    args = ["fit", "--events", simulated / "events.csv", "--drivers", simulated / "drivers.csv",
            "--a", 0.03, "--b", 0.8, "--smart-start", "--iterations", 10]
    run(*args, "--out-dir", tmp_path / "fit1")
    run(*args, "--out-dir", tmp_path / "fit2")
    first = (tmp_path / "fit1" / "events.fit.json").read_bytes()
    assert first == (tmp_path / "fit2" / "events.fit.json").read_bytes()
    report = read_fit_report(tmp_path / "fit1" / "events.fit.json")
    assert report.iterations_run <= 10 and report.nll_history
    assert "Termination:" in capsys.readouterr().out


def test_fit_from_explicit_params(tmp_path, run, simulated):
    run("fit", "--events", simulated / "events.csv", "--drivers", simulated / "drivers.csv",
        "--init-params", simulated / "params.json", "--iterations", 5, "--out-dir", tmp_path / "fit")
    report = read_fit_report(tmp_path / "fit" / "events.fit.json")
    assert report.diagnostics["init"] == "explicit"


def test_eval_of_identical_params_is_zero(run, simulated, capsys, tmp_path):
    params = simulated / "params.json"
    curve = tmp_path / "curve.csv"
    run("eval", "--true", params, "--estimated", params, "--driver-id", "wide", "--curve", curve)
    out = capsys.readouterr().out
    assert "linf_distance: 0.0" in out
    assert "relative_linf: 0.0" in out
    with open(curve) as f:
        rows = list(csv.DictReader(f))
    assert rows[0]["t"] == "0" and rows[0]["true"] == rows[0]["estimated"]


def test_binarize_and_percentile_sweep(tmp_path, run, simulated):
    events = read_events(simulated / "events.csv")
    activations = tmp_path / "atom.csv"
    values = np.random.default_rng(0).uniform(0.1, 1.0, size=events.count)
    with open(activations, "w") as f:
        f.write("time,value\n")
        for t, v in zip(events.events, values):
            f.write(f"{t!r},{v!r}\n")

    run("binarize", "--activations", activations, "--percentile", 50, "--duration", 200,
        "--out", tmp_path / "binarized.csv")
    binarized = read_events(tmp_path / "binarized.csv")
    assert binarized.duration == 200.0
    assert binarized.count == np.count_nonzero(values > np.percentile(values, 50))

    run("sweep", "--percentiles", 0, 50, "--activations", activations, "--drivers", simulated / "drivers.csv",
        "--duration", 200, "--iterations", 5, "--out-dir", tmp_path / "sweep")
    with open(tmp_path / "sweep" / "sweep_percentile.csv") as f:
        rows = list(csv.DictReader(f))
    assert [row["percentile"] for row in rows] == ["0", "0", "50", "50"]


def test_support_sweep_writes_table(tmp_path, run, simulated):
    run("sweep", "--b-values", 0.5, 1, "--events", simulated / "events.csv", "--drivers", simulated / "drivers.csv",
        "--iterations", 5, "--out-dir", tmp_path / "sweep")
    with open(tmp_path / "sweep" / "sweep_b.csv") as f:
        rows = list(csv.DictReader(f))
    assert sorted({row["b"] for row in rows}) == ["0.5", "1"]
    assert all(row["error"] == "" for row in rows)


def test_support_sweep_from_explicit_params(tmp_path, run, simulated):
    run("sweep", "--b-values", 0.5, 1, "--events", simulated / "events.csv", "--drivers", simulated / "drivers.csv",
        "--init-params", simulated / "params.json", "--iterations", 5, "--out-dir", tmp_path / "sweep")
    with open(tmp_path / "sweep" / "sweep_b.csv") as f:
        rows = list(csv.DictReader(f))
    assert rows and all(row["init"] == "explicit" and row["error"] == "" for row in rows)


def test_sweep_grid_and_init_come_from_config(tmp_path, monkeypatch, simulated):
    monkeypatch.delenv("DRIPP_OUTPUT_DIR", raising=False)
    config = tmp_path / "config.toml"
    config.write_text(
        "[sweep]\nb_values = [0.6, 2.0]\n\n"
        f"[em]\ninit = \"explicit\"\ninit_params = \"{simulated / 'params.json'}\"\n"
    )
    main(["-c", str(config), "sweep", "--events", str(simulated / "events.csv"),
          "--drivers", str(simulated / "drivers.csv"), "--iterations", "5", "--out-dir", str(tmp_path / "sweep")])
    with open(tmp_path / "sweep" / "sweep_b.csv") as f:
        rows = list(csv.DictReader(f))
    assert sorted({float(row["b"]) for row in rows}) == [0.6, 2.0]
    assert {row["init"] for row in rows} == {"explicit"}


def test_sweep_grid_must_match_its_source(tmp_path, run, simulated, capsys):
    with pytest.raises(SystemExit) as excinfo:
        run("sweep", "--percentiles", 50, "--events", simulated / "events.csv",
            "--drivers", simulated / "drivers.csv", "--out-dir", tmp_path / "sweep")
    assert excinfo.value.code == EXIT_VALIDATION
    assert "--activations" in capsys.readouterr().err


def test_ttest_writes_results(tmp_path, run, simulated, capsys):
    out = tmp_path / "ttest.csv"
    run("ttest", "--events", simulated / "events.csv", "--drivers", simulated / "drivers.csv", "--out", out)
    with open(out) as f:
        rows = list(csv.DictReader(f))
    assert [row["driver_id"] for row in rows] == ["sharp", "wide"]
    assert all(0 <= float(row["p_value"]) <= 1 for row in rows)
    assert "Segment t-test" in capsys.readouterr().out


def test_config_command_prints_defaults(run, capsys):
    run("config")
    out = capsys.readouterr().out
    assert "Not found (using defaults)" in out
    assert "n_iterations = 50" in out


def test_invalid_support_exits_with_validation_code(run, simulated, capsys):
    with pytest.raises(SystemExit) as excinfo:
        run("ttest", "--events", simulated / "events.csv", "--drivers", simulated / "drivers.csv",
            "--a", 1, "--b", 0.5)
    assert excinfo.value.code == EXIT_VALIDATION
    record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert record["error"] == "validation"
    assert record["command"] == "ttest"


def test_missing_events_file_exits_with_io_code(tmp_path, run, simulated, capsys):
    with pytest.raises(SystemExit) as excinfo:
        run("fit", "--events", tmp_path / "missing.csv", "--drivers", simulated / "drivers.csv",
            "--smart-start", "--out-dir", tmp_path / "fit")
    assert excinfo.value.code == EXIT_IO
    record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert record["error"] == "io"


def test_experiment_writes_tables(tmp_path, monkeypatch, capsys):
    monkeypatch.delenv("DRIPP_JOBS", raising=False)
    monkeypatch.setenv("DRIPP_OUTPUT_DIR", str(tmp_path / "from_env"))
    config = tmp_path / "config.toml"
    config.write_text("[experiment]\nT_values = [200.0]\nkeep_values = [0.6]\nn_seeds = 2\n")
    out = tmp_path / "experiment"
    main(["-c", str(config), "experiment", "--out-dir", str(out)])

    with open(out / "recovery.csv") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 4
    assert {row["driver_id"] for row in rows} == {"wide", "sharp"}
    assert len(list((out / "cells").glob("*.csv"))) == 2
    with open(out / "aggregate.csv") as f:
        assert [row["n"] for row in csv.DictReader(f)] == ["2", "2"]
    assert (out / "runtime.csv").exists()
    assert not (tmp_path / "from_env").exists()
    assert "Experiment Summary" in capsys.readouterr().out
