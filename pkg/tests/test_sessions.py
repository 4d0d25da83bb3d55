import numpy as np
import pytest

from menroll.core.exceptions import ValidationError
from menroll.fleet.sessions import (
    EvSession,
    boundary_injections,
    greedy_schedule,
    is_reachable,
    presence,
    random_feasible_schedule,
    sessions_from_json,
    sessions_to_json,
    soc_step,
)
from menroll.scenario.forecast import make_rng
from menroll.scenario.timegrid import TimeGrid


def make_session(**overrides):
    data = dict(
        id="EV1", station_id="CS1", t_arrive=8, t_leave=17,
        soc_arrive=20.0, soc_leave=50.0, soc_min=5.0, soc_max=60.0,
        p_ch_max=7.0, p_dis_max=7.0,
    )
    data.update(overrides)
    return EvSession(**data)


def test_presence_markers():
    grid = TimeGrid.day_ahead()
    d = presence(make_session(), grid)
    assert d.as_int().sum() == 10
    assert np.flatnonzero(d.arrival_marker()).tolist() == [8]
    assert np.flatnonzero(d.departure_marker()).tolist() == [18]


def test_departure_marker_absent_when_staying_to_the_end():
    grid = TimeGrid.day_ahead()
    d = presence(make_session(t_leave=23), grid)
    assert not d.departure_marker().any()


def test_boundary_injections():
    grid = TimeGrid.day_ahead()
    inj = boundary_injections(make_session(), grid)
    assert inj[8] == 20.0
    assert inj[18] == -50.0
    assert np.count_nonzero(inj.values) == 2


@pytest.mark.parametrize("overrides", [
    {"t_arrive": 10, "t_leave": 9},
    {"soc_arrive": 70.0},
    {"soc_leave": 1.0},
    {"eta_ch": 0.0},
    {"p_ch_max": -1.0},
])
def test_invalid_sessions(overrides):
    with pytest.raises(ValidationError):
        make_session(**overrides)


def test_session_beyond_grid():
    with pytest.raises(ValidationError):
        presence(make_session(t_leave=30), TimeGrid.day_ahead())


def test_soc_step_applies_efficiencies():
    s = make_session(eta_ch=0.9, eta_dis=0.8)
    assert soc_step(s, 10.0, 5.0, 0.0, 1.0) == pytest.approx(14.5)
    assert soc_step(s, 10.0, 0.0, 4.0, 1.0) == pytest.approx(5.0)
    with pytest.raises(ValidationError):
        soc_step(s, 10.0, 8.0, 0.0, 1.0)


def test_greedy_reaches_target():
    grid = TimeGrid.day_ahead()
    s = make_session()
    schedule = greedy_schedule(s, grid)
    assert schedule is not None
    assert schedule.soc[s.t_leave] == pytest.approx(s.soc_leave)
    assert np.all(schedule.p_ch <= s.p_ch_max + 1e-9)


def test_unreachable_target():
    grid = TimeGrid.day_ahead()
    s = make_session(t_arrive=8, t_leave=9, soc_arrive=6.0, soc_leave=60.0)
    assert not is_reachable(s, grid)
    with pytest.raises(ValidationError):
        random_feasible_schedule(s, grid, make_rng(1))


def test_random_schedule_stays_in_corridor():
    grid = TimeGrid.day_ahead()
    s = make_session()
    rng = make_rng(11)
    for _ in range(20):
        sch = random_feasible_schedule(s, grid, rng)
        present = slice(s.t_arrive, s.t_leave + 1)
        assert np.all(sch.soc[present] >= s.soc_min - 1e-9)
        assert np.all(sch.soc[present] <= s.soc_max + 1e-9)
        assert sch.soc[s.t_leave] == pytest.approx(s.soc_leave, abs=1e-6)
        assert not sch.p_ch[: s.t_arrive].any()


def test_rescaled_to_quarter_hours():
    s = make_session().rescaled(TimeGrid.day_ahead(), TimeGrid.intra_day())
    assert (s.t_arrive, s.t_leave) == (32, 71)
    assert is_reachable(s, TimeGrid.intra_day())


def test_json_round_trip():
    sessions = [make_session(), make_session(id="EV2", soc_leave=30.0)]
    assert sessions_from_json(sessions_to_json(sessions)) == sessions
