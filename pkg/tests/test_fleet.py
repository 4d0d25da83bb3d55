import pytest

from menroll.core.exceptions import ValidationError
from menroll.fleet.sessions import is_reachable
from menroll.fleet.synthesis import FleetSpec, synthesize_fleet
from menroll.scenario.timegrid import TimeGrid


def test_same_seed_same_fleet():
    grid = TimeGrid.day_ahead()
    spec = FleetSpec("CS1", n_evs=12, seed=5)
    assert synthesize_fleet(spec, grid) == synthesize_fleet(spec, grid)
    other = synthesize_fleet(FleetSpec("CS1", n_evs=12, seed=6), grid)
    assert other != synthesize_fleet(spec, grid)


@pytest.mark.parametrize("seed", range(10))
def test_every_target_is_reachable(seed):
    grid = TimeGrid.day_ahead()
    for s in synthesize_fleet(FleetSpec("CS1", n_evs=20, seed=seed), grid):
        assert is_reachable(s, grid)
        assert 0 <= s.t_arrive <= s.t_leave < grid.n_steps
        assert s.soc_min <= s.soc_arrive <= s.soc_leave <= s.soc_max


def test_short_stays_lower_the_target(caplog):
    grid = TimeGrid.day_ahead()
    spec = FleetSpec("CS9", n_evs=10, seed=1, stay_hours=(1.0, 1.0), p_ch_max=1.0)
    sessions = synthesize_fleet(spec, grid)
    assert all(is_reachable(s, grid) for s in sessions)
    assert any("departure targets" in rec.message for rec in caplog.records)


def test_empty_fleet():
    assert synthesize_fleet(FleetSpec("CS1", n_evs=0, seed=1), TimeGrid.day_ahead()) == []


@pytest.mark.parametrize("kwargs", [
    {"n_evs": -1},
    {"seed": -3},
    {"arrival_cohorts": ()},
    {"soc_leave_fraction": (0.9, 0.8)},
    {"soc_max_kwh": (0.0, 10.0)},
])
def test_invalid_specs(kwargs):
    base = {"station_id": "CS1", "n_evs": 3, "seed": 1}
    base.update(kwargs)
    with pytest.raises(ValidationError):
        FleetSpec(**base)


def test_spec_dict_round_trip():
    spec = FleetSpec("CS2", n_evs=4, seed=9, arrival_cohorts=((7.5, 0.5, 1.0),))
    assert FleetSpec.from_dict("CS2", spec.to_dict()) == spec
