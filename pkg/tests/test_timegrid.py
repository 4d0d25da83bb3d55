import copy
import pickle

import numpy as np
import pytest

from menroll.core.exceptions import AlignmentError, ValidationError
from menroll.scenario.timegrid import Profile, TimeGrid, Unit, resample


def test_standard_grids():
    da = TimeGrid.day_ahead()
    intra = TimeGrid.intra_day()
    assert (da.n_steps, da.step_minutes) == (24, 60)
    assert (intra.n_steps, intra.step_minutes) == (96, 15)
    assert da.ratio_to(intra) == 4
    assert intra.dt_hours == 0.25
    assert intra.hours()[5] == pytest.approx(1.25)


@pytest.mark.parametrize("kwargs", [
    {"start_hour": 0.0, "step_minutes": 0, "n_steps": 24},
    {"start_hour": 0.0, "step_minutes": 60, "n_steps": 0},
    {"start_hour": 25.0, "step_minutes": 60, "n_steps": 24},
])
def test_grid_rejects_bad_shape(kwargs):
    with pytest.raises(ValidationError):
        TimeGrid(**kwargs)


def test_step_of_hour():
    grid = TimeGrid.intra_day()
    assert grid.step_of_hour(0.0) == 0
    assert grid.step_of_hour(13.9) == 55
    with pytest.raises(ValidationError):
        grid.step_of_hour(24.0)


def test_profile_is_immutable():
    p = Profile.constant(TimeGrid.day_ahead(), 3.0)
    with pytest.raises(AttributeError):
        p.values = np.zeros(24)
    with pytest.raises(ValueError):
        p.values[0] = 1.0


def test_profile_survives_copying():
    p = Profile(TimeGrid.day_ahead(), np.arange(24.0), Unit.KWH)
    holder = {"profile": p, "series": np.zeros(3)}
    cloned = copy.deepcopy(holder)
    assert cloned["profile"] is p
    assert cloned["series"] is not holder["series"]
    assert copy.copy(p) is p
    assert pickle.loads(pickle.dumps(p)) == p


def test_profile_length_mismatch():
    with pytest.raises(ValidationError):
        Profile(TimeGrid.day_ahead(), [1.0, 2.0])


def test_refine_power_repeats():
    hourly = Profile(TimeGrid.day_ahead(), np.arange(24, dtype=float))
    fine = resample(hourly, TimeGrid.intra_day())
    assert fine.values[:8].tolist() == [0, 0, 0, 0, 1, 1, 1, 1]
    assert fine.energy() == pytest.approx(hourly.energy())


def test_refine_energy_splits():
    hourly = Profile.constant(TimeGrid.day_ahead(), 8.0, Unit.KWH)
    fine = resample(hourly, TimeGrid.intra_day())
    assert np.allclose(fine.values, 2.0)
    assert fine.energy() == pytest.approx(hourly.energy())


def test_coarsen_power_averages():
    values = np.tile([0.0, 4.0, 8.0, 12.0], 24)
    fine = Profile(TimeGrid.intra_day(), values)
    hourly = resample(fine, TimeGrid.day_ahead())
    assert np.allclose(hourly.values, 6.0)
    assert hourly.energy() == pytest.approx(fine.energy())


def test_round_trip_is_identity_for_hourly():
    rng = np.random.default_rng(3)
    hourly = Profile(TimeGrid.day_ahead(), rng.uniform(0, 50, 24))
    back = resample(resample(hourly, TimeGrid.intra_day()), TimeGrid.day_ahead())
    assert np.allclose(back.values, hourly.values)


def test_unalignable_grids():
    p = Profile.zeros(TimeGrid(0.0, 45, 32))
    with pytest.raises(AlignmentError):
        resample(p, TimeGrid.day_ahead())


def test_different_horizons():
    p = Profile.zeros(TimeGrid(0.0, 60, 12))
    with pytest.raises(AlignmentError):
        resample(p, TimeGrid.intra_day())
