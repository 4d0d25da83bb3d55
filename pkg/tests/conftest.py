import os
import tempfile

# Log files go to a scratch directory; must be set before menroll is imported
os.environ.setdefault("MENROLL_LOG_DIR", tempfile.mkdtemp(prefix="menroll-test-logs-"))

import pytest  # noqa: E402

from menroll.dispatch.day_ahead import build_day_ahead, solve_day_ahead  # noqa: E402
from menroll.scenario.scenario_config import load_baseline, parse_scenario  # noqa: E402


def small_scenario_dict(n_evs: int = 4) -> dict:
    """Baseline with a single, small charging station"""
    data = load_baseline().to_dict()
    data["name"] = "small"
    data["stations"] = [{"station_id": "CS1", "fleet": {"n_evs": n_evs, "seed": 101}}]
    return data


@pytest.fixture
def small_data():
    """Fresh, mutable scenario dict of the small scenario"""
    return small_scenario_dict()


@pytest.fixture(scope="session")
def baseline():
    return load_baseline()


@pytest.fixture(scope="session")
def small_cfg():
    return parse_scenario(small_scenario_dict(), "small")


@pytest.fixture(scope="session")
def small_plan(small_cfg):
    """Day-ahead plan of the small scenario without demand response"""
    return solve_day_ahead(build_day_ahead(small_cfg, small_cfg.envelopes(), dr_enabled=False))


@pytest.fixture(scope="session")
def exact_cfg(small_cfg):
    return small_cfg.without_forecast_error()


@pytest.fixture(scope="session")
def exact_plan(exact_cfg):
    return solve_day_ahead(build_day_ahead(exact_cfg, exact_cfg.envelopes(), dr_enabled=False))
