import numpy as np
import pytest

from menroll.core.exceptions import ValidationError
from menroll.devices.demand_response import (
    DrDecision,
    DrParams,
    add_demand_response,
    balance_windows,
    dr_cost,
    effective_loads,
)
from menroll.milp.model import MilpModel, lin_sum
from menroll.milp.solvers import solve
from menroll.scenario.timegrid import Profile, TimeGrid


@pytest.fixture
def grid():
    return TimeGrid.day_ahead()


@pytest.fixture
def params(grid):
    return DrParams(
        shiftable_fraction_e=0.2,
        shift_balance_window=24,
        curtail_cap_e=Profile.constant(grid, 10.0),
        curtail_cap_h=Profile.constant(grid, 5.0),
        lambda_e=0.8,
        lambda_h=0.5,
        peak_steps=frozenset(range(18, 22)),
        valley_steps=frozenset(range(0, 6)),
    )


def test_overlapping_peak_and_valley(grid, params):
    with pytest.raises(ValidationError):
        DrParams(**{**params.__dict__, "valley_steps": frozenset({5, 18})})


def test_step_outside_grid(grid, params):
    with pytest.raises(ValidationError):
        DrParams(**{**params.__dict__, "peak_steps": frozenset({30})})


def test_balance_windows():
    assert balance_windows(24, 24) == [(0, 24)]
    assert balance_windows(10, 4) == [(0, 4), (4, 8), (8, 10)]


def test_zero_decision_keeps_loads(grid):
    base_e, base_h = Profile.constant(grid, 100.0), Profile.constant(grid, 40.0)
    load_e, load_h = effective_loads(base_e, base_h, DrDecision.zeros(grid))
    assert load_e == base_e and load_h == base_h
    assert DrDecision.zeros(grid).is_zero()


def test_negative_effective_load(grid):
    base_e, base_h = Profile.constant(grid, 5.0), Profile.constant(grid, 5.0)
    cut = np.zeros(24)
    cut[3] = 6.0
    d = DrDecision(Profile.zeros(grid), Profile.zeros(grid), Profile(grid, cut), Profile.zeros(grid))
    with pytest.raises(ValidationError):
        effective_loads(base_e, base_h, d)


def test_mixed_curtailment_cost(grid, params):
    rng = np.random.default_rng(4)
    cut_e, cut_h = rng.uniform(0, 10, 24), rng.uniform(0, 5, 24)
    d = DrDecision(Profile.zeros(grid), Profile.zeros(grid), Profile(grid, cut_e), Profile(grid, cut_h))
    independent = sum(0.8 * e + 0.5 * h for e, h in zip(cut_e, cut_h))
    assert dr_cost(d, params) == pytest.approx(independent)


def test_shifting_alone_is_free(grid, params):
    shift = np.zeros(24)
    shift[19] = 5.0
    back = np.zeros(24)
    back[2] = 5.0
    d = DrDecision(Profile(grid, back), Profile(grid, shift), Profile.zeros(grid), Profile.zeros(grid))
    assert dr_cost(d, params) == 0.0
    d.check(params, Profile.constant(grid, 100.0), Profile.constant(grid, 40.0))


def test_check_rejects_non_neutral_shift(grid, params):
    shift = np.zeros(24)
    shift[19] = 5.0
    d = DrDecision(Profile.zeros(grid), Profile(grid, shift), Profile.zeros(grid), Profile.zeros(grid))
    with pytest.raises(ValidationError):
        d.check(params, Profile.constant(grid, 100.0), Profile.constant(grid, 40.0))


def test_disabled_adds_nothing(grid, params):
    m = MilpModel("dr")
    assert add_demand_response(m, params, Profile.constant(grid, 50.0), Profile.zeros(grid), enabled=False) is None
    assert m.n_vars == 0


def test_price_steered_shift(grid, params):
    base_e = Profile.constant(grid, 100.0)
    base_h = Profile.constant(grid, 20.0)
    price = np.where(np.isin(np.arange(24), list(params.peak_steps)), 1.2, 0.4)
    m = MilpModel("dr")
    v = add_demand_response(m, params, base_e, base_h)
    load = [base_e[t] + v.shift_in[t] - v.shift_out[t] - v.curtail_e[t] for t in range(24)]
    m.add_objective(lin_sum(float(price[t]) * load[t] for t in range(24)))
    m.add_objective(lin_sum(params.lambda_e * c for c in v.curtail_e))
    m.add_objective(lin_sum(params.lambda_h * c for c in v.curtail_h))
    sol = solve(m)
    d = DrDecision(*(Profile(grid, sol.array(getattr(v, name))) for name in ("shift_in", "shift_out", "curtail_e", "curtail_h")))
    d.check(params, base_e, base_h)
    assert d.shift_out.values.sum() == pytest.approx(4 * 20.0)
    assert d.shift_in.values.sum() == pytest.approx(4 * 20.0)
    # curtailment pays off only where the price beats lambda_e
    assert d.curtail_e.values[list(params.peak_steps)] == pytest.approx(10.0)
    assert d.curtail_e.values[:6] == pytest.approx(0.0)
    assert d.curtail_h.values == pytest.approx(0.0)
