import json
import logging
import sys

import pytest

from menroll.reports.constants import ERROR_FILE, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_OK, MANIFEST_FILE
from menroll.scripts import cli


def test_menroll_help(monkeypatch, capsys):
    monkeypatch.setattr(sys, "argv", ["menroll", "--help"])
    with pytest.raises(SystemExit) as exc:
        cli.main()
    out = capsys.readouterr().out
    assert "Two-stage micro-energy network scheduling" in out
    assert exc.value.code == 0


def test_validate_baseline(capsys):
    assert cli.main(["validate"]) == EXIT_OK
    assert "baseline: ok" in capsys.readouterr().out


def test_validate_reports_every_issue(tmp_path, small_data, capsys):
    small_data["colour"] = "blue"
    small_data["loads"]["electric"]["values"][19] = 5000.0
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(small_data))

    assert cli.main(["validate", "--scenario", str(path)]) == EXIT_CONFIG
    lines = [line for line in capsys.readouterr().out.splitlines() if line.startswith(str(path))]
    assert len(lines) == 2
    assert any("step 19" in line for line in lines)


def test_validate_unparsable_scenario(tmp_path, small_data, capsys):
    small_data["eta_confidence"] = 1.5
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(small_data))
    assert cli.main(["validate", "--scenario", str(path)]) == EXIT_CONFIG
    assert "Confidence level" in capsys.readouterr().out


def test_validate_good_file(tmp_path, small_data, capsys):
    path = tmp_path / "small.json"
    path.write_text(json.dumps(small_data))
    assert cli.main(["validate", "--scenario", str(path)]) == EXIT_OK
    assert f"{path}: ok" in capsys.readouterr().out


def test_missing_config_file(tmp_path, caplog):
    with caplog.at_level(logging.ERROR):
        ret = cli.main(["run", "--config", str(tmp_path / "nope.ini"), "--out", str(tmp_path / "out")])
    assert ret == EXIT_CONFIG
    assert any("Error loading configuration" in rec.message for rec in caplog.records)
    record = json.loads((tmp_path / "out" / ERROR_FILE).read_text())
    assert record["error"] == "ConfigurationError"
    assert record["exit_code"] == EXIT_CONFIG


def test_unreadable_scenario(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert cli.main(["day-ahead", "--scenario", str(path), "--out", str(tmp_path / "out")]) == EXIT_CONFIG


def test_infeasible_day_ahead_exit_code(tmp_path, small_data):
    small_data["loads"]["electric"]["values"][19] = 5000.0
    path = tmp_path / "overload.json"
    path.write_text(json.dumps(small_data))
    out = tmp_path / "out"

    assert cli.main(["day-ahead", "--scenario", str(path), "--no-dr", "--out", str(out)]) == EXIT_INFEASIBLE
    record = json.loads((out / ERROR_FILE).read_text())
    assert record["error"] == "InfeasibleError"
    # the manifest is written before solving
    assert (out / MANIFEST_FILE).exists()


def test_day_ahead_command_writes_plan(tmp_path, small_data, monkeypatch):
    monkeypatch.delenv("MENROLL_SOLVER", raising=False)
    path = tmp_path / "small.json"
    path.write_text(json.dumps(small_data))
    out = tmp_path / "out"

    assert cli.main(["day-ahead", "--scenario", str(path), "--no-dr", "--out", str(out), "--seed", "3"]) == EXIT_OK
    manifest = json.loads((out / MANIFEST_FILE).read_text())
    assert manifest["seed"] == 3
    assert manifest["dr_settings"] == [False]
    assert (out / "scenario1_day_ahead.csv").exists()
    summary = json.loads((out / "day_ahead.json").read_text())
    assert summary["run_id"] == manifest["config_hash"][:12]
    assert summary["scenario1"]["decomposable_rate"] <= 1.0


def test_malformed_config_value_exit_code(tmp_path):
    cfg_file = tmp_path / "menroll.ini"
    cfg_file.write_text("[solver]\nmip_gap=tight\n")
    out = tmp_path / "out"

    assert cli.main(["run", "--config", str(cfg_file), "--out", str(out)]) == EXIT_CONFIG
    record = json.loads((out / ERROR_FILE).read_text())
    assert record["error"] == "ConfigurationError"
    assert "solver.mip_gap" in record["message"]
