"""Command-line interface: outputs, manifests, and exit codes."""

import csv
import json

import pytest

from hetnetsim import __version__
from hetnetsim.cli import EXIT_CONFIG, EXIT_INFEASIBLE, main


def test_analytic_stdout_json(capsys):
    assert main(["analytic", "--K", "3", "--no-mean-rate"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["coverage"]["O"] == pytest.approx(0.04798261113971325)
    assert out["rate"]["mean_rate"] is None


def test_analytic_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"K": 2, "T_db": 0.0}))
    assert main(["analytic", "--config", str(cfg), "--K", "1",
                 "--no-mean-rate"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["coverage"]["O"] == pytest.approx(0.3633802276324186)


def test_bad_config_exit_code(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"nonsense": 1}))
    assert main(["analytic", "--config", str(cfg)]) == EXIT_CONFIG
    assert "error:" in capsys.readouterr().err


def test_simulate_outputs(tmp_path):
    out = tmp_path / "est.csv"
    trace = tmp_path / "trace.jsonl"
    manifest = tmp_path / "run.json"
    assert main(["simulate", "-N", "40", "--seed", "9", "-L", "6",
                 "--out", str(out), "--trace", str(trace),
                 "--manifest", str(manifest)]) == 0
    rows = list(csv.DictReader(out.open()))
    metrics = {r["metric"] for r in rows}
    assert {"outage", "A_mu", "rate_coverage", "mean_rate"} <= metrics
    lines = [json.loads(line) for line in trace.read_text().splitlines()]
    assert len(lines) == 40 and lines[0]["run"] == 0
    man = json.load(manifest.open())
    assert man["hetnetsim_version"] == __version__
    assert man["params"]["K"] == 1 and man["seed"] == 9


def test_sweep_outputs_and_partial_failure(tmp_path):
    out_dir = tmp_path / "sw"
    # gamma=2 is invalid: its row must be annotated, not fatal
    assert main(["sweep", "--var", "gamma", "--values", "3.5,4.0,2.0",
                 "--no-sim", "--out-dir", str(out_dir)]) == 0
    rows = list(csv.DictReader((out_dir / "sweep_outage.csv").open()))
    assert len(rows) == 3
    assert rows[0]["error"] == "" and rows[0]["analytic"]
    assert "PathLossTooSmall" in rows[2]["error"]
    assert (out_dir / "manifest.json").exists()


def test_sweep_empty_values_is_an_error(tmp_path, capsys):
    assert main(["sweep", "--var", "K", "--values", " ", "--no-sim",
                 "--out-dir", str(tmp_path / "x")]) == EXIT_CONFIG


def test_plan_default(tmp_path, capsys):
    contour = tmp_path / "grid.csv"
    assert main(["plan", "--contour", str(contour)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["K"] == 3
    assert abs(out["density_ratio"] - 5.0) <= 0.5
    assert sum(1 for _ in contour.open()) > 1


def test_plan_infeasible_exit_code(tmp_path, capsys):
    req = tmp_path / "req.json"
    req.write_text(json.dumps({"rate_cov_min": 0.999}))
    assert main(["plan", "--request", str(req)]) == EXIT_INFEASIBLE
    assert json.loads(capsys.readouterr().out)["path"] == "infeasible"


def test_compare_lists_all_schemes(tmp_path):
    out = tmp_path / "cmp.csv"
    assert main(["compare", "-N", "25", "-L", "4", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert [r["scheme"] for r in rows] == [
        "prioritized-sir", "max-sir", "max-sir", "max-rsrp-shared",
        "max-rsrp-K", "max-rsrp-rp1", "biased-rsrp-rp2"]


def test_validate_passes(capsys):
    assert main(["validate", "-N", "150", "-L", "8", "--seed", "4"]) == 0
    assert "FAIL" not in capsys.readouterr().out
