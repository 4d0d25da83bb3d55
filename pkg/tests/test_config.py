import argparse
import logging
import os

import pytest

from menroll.core import config
from menroll.core.exceptions import ConfigurationError
from menroll.milp.constants import DEFAULT_MIP_GAP, DEFAULT_NODE_LIMIT
from menroll.reports.constants import DEFAULT_FLOAT_FORMAT, DEFAULT_OUT_DIR, DEFAULT_SEED


def _args(*argv):
    return config.build_parser().parse_args(list(argv))


def test_load_config_reads_sections(tmp_path):
    cfg_file = tmp_path / "menroll.ini"
    cfg_file.write_text("[solver]\nbackend=branch-and-bound\nmip_gap=0.01\n[output]\nfloat_format=%.3f\n")
    os.chmod(cfg_file, 0o600)

    cfg = config.load_config(str(cfg_file))
    assert cfg.get("solver", "backend") == "branch-and-bound"
    assert cfg.get("output", "float_format") == "%.3f"


def test_load_config_warns_about_permissions(tmp_path, caplog):
    cfg_file = tmp_path / "menroll.ini"
    cfg_file.write_text("[run]\nseed=1\n")
    os.chmod(cfg_file, 0o644)
    with caplog.at_level(logging.WARNING):
        assert config.load_config(str(cfg_file)) is not None
    assert any("world-readable" in rec.message for rec in caplog.records)


def test_load_config_missing_file(caplog):
    with caplog.at_level(logging.ERROR):
        assert config.load_config("does-not-exist.ini") is None
    assert any("Error loading configuration" in rec.message for rec in caplog.records)


def test_defaults_without_config(monkeypatch):
    monkeypatch.delenv("MENROLL_SOLVER", raising=False)
    args, cfg_obj = config.parse_args(["run"])

    assert cfg_obj is None
    assert args.seed == DEFAULT_SEED
    assert args.out == DEFAULT_OUT_DIR
    assert args.strategy == "both"
    assert args.backend == "highs"
    assert args.mip_gap == DEFAULT_MIP_GAP
    assert args.node_limit == DEFAULT_NODE_LIMIT
    assert args.float_format == DEFAULT_FLOAT_FORMAT
    assert args.window_steps is None
    assert args.no_dr is False


def test_command_line_beats_config_beats_defaults(tmp_path, monkeypatch):
    monkeypatch.delenv("MENROLL_SOLVER", raising=False)
    cfg_file = tmp_path / "menroll.ini"
    cfg_file.write_text(
        "[run]\nseed=5\nscenario=winter.json\n"
        "[solver]\nbackend=branch-and-bound\ntime_limit=30\n"
        "[rolling]\nwindow_steps=12\nexecute_steps=2\n"
        "[output]\ndir=from-config\n"
    )
    os.chmod(cfg_file, 0o600)

    args, cfg_obj = config.parse_args(["roll", "--config", str(cfg_file), "--seed", "9", "--window-steps", "8"])

    assert cfg_obj is not None
    assert args.seed == 9
    assert args.window_steps == 8
    assert args.execute_steps == 2
    assert args.scenario == "winter.json"
    assert args.backend == "branch-and-bound"
    assert args.time_limit == 30.0
    assert args.out == "from-config"


def test_environment_selects_solver(monkeypatch):
    monkeypatch.setenv("MENROLL_SOLVER", "branch-and-bound")
    args, _ = config.parse_args(["day-ahead"])
    assert args.backend == "branch-and-bound"
    assert config.solver_options_from_args(args).backend == "branch-and-bound"


def test_unreadable_config_is_an_error():
    with pytest.raises(ConfigurationError):
        config.parse_args(["run", "--config", "does-not-exist.ini"])


def test_validate_accepts_defaults(monkeypatch):
    monkeypatch.delenv("MENROLL_SOLVER", raising=False)
    args = config.apply_config(_args("run"), None)
    config.validate_run_config(args)


@pytest.mark.parametrize(
    "field, value",
    [
        ("backend", "cplex"),
        ("time_limit", 0.0),
        ("mip_gap", 1.0),
        ("node_limit", 0),
        ("seed", -1),
        ("window_steps", 0),
        ("float_format", "%s %s"),
    ],
)
def test_validate_rejects(field, value, monkeypatch):
    monkeypatch.delenv("MENROLL_SOLVER", raising=False)
    args = config.apply_config(_args("run"), None)
    setattr(args, field, value)
    with pytest.raises(ConfigurationError):
        config.validate_run_config(args)


def test_validate_rejects_execute_longer_than_window():
    args = argparse.Namespace(
        command="roll", backend="highs", time_limit=None, mip_gap=0.0, node_limit=10, seed=1,
        window_steps=4, execute_steps=6, float_format="%.6f", config=None,
    )
    with pytest.raises(ConfigurationError):
        config.validate_run_config(args)


@pytest.mark.parametrize(
    "section, line, setting",
    [
        ("solver", "time_limit=soon", "solver.time_limit"),
        ("solver", "node_limit=1e3", "solver.node_limit"),
        ("rolling", "window_steps=four", "rolling.window_steps"),
        ("run", "seed=7.5", "run.seed"),
    ],
)
def test_malformed_number_is_configuration_error(tmp_path, section, line, setting):
    cfg_file = tmp_path / "menroll.ini"
    cfg_file.write_text(f"[{section}]\n{line}\n")
    os.chmod(cfg_file, 0o600)

    with pytest.raises(ConfigurationError) as exc_info:
        config.parse_args(["run", "--config", str(cfg_file)])
    assert exc_info.value.setting == setting
    assert exc_info.value.config_file == str(cfg_file)
