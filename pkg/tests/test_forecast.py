import numpy as np
import pytest

from menroll.core.exceptions import ValidationError
from menroll.scenario.forecast import (
    ForecastModel,
    derive_seed,
    sample_realization,
    std_normal_quantile,
)
from menroll.scenario.timegrid import Profile, TimeGrid


@pytest.fixture
def model():
    grid = TimeGrid.day_ahead()
    forecast = Profile(grid, 100 * np.sin(np.linspace(0, np.pi, 24)) + 1.0)
    return ForecastModel.proportional(forecast, 0.1, seed=7)


@pytest.mark.parametrize("eta, expected", [
    (0.5, 0.0),
    (0.95, 1.644854),
    (0.975, 1.959964),
    (0.05, -1.644854),
])
def test_quantile(eta, expected):
    assert std_normal_quantile(eta) == pytest.approx(expected, abs=1e-6)


def test_median_quantile_is_exact_zero():
    assert std_normal_quantile(0.5) == 0.0


@pytest.mark.parametrize("eta", [0.0, 1.0, -0.1, 1.5])
def test_quantile_domain(eta):
    with pytest.raises(ValidationError):
        std_normal_quantile(eta)


def test_sampling_is_deterministic(model):
    a = sample_realization(model, 3)
    b = sample_realization(model, 3)
    c = sample_realization(model, 4)
    assert a == b
    assert not np.array_equal(a.values, c.values)


def test_sampling_is_nonnegative():
    grid = TimeGrid.day_ahead()
    fm = ForecastModel(Profile.constant(grid, 1.0), Profile.constant(grid, 50.0), seed=1)
    assert np.all(sample_realization(fm).values >= 0.0)


def test_zero_sigma_returns_forecast(model):
    exact = ForecastModel.proportional(model.forecast, 0.0, seed=5)
    assert np.array_equal(sample_realization(exact).values, model.forecast.values)


def test_negative_sigma_rejected(model):
    with pytest.raises(ValidationError):
        ForecastModel(model.forecast, model.sigma.scaled(-1.0))
    with pytest.raises(ValidationError):
        ForecastModel.proportional(model.forecast, -0.1)


def test_scaled_and_resampled(model):
    doubled = model.scaled(2.0)
    assert np.allclose(doubled.sigma.values, 2 * model.sigma.values)
    fine = model.on_grid(TimeGrid.intra_day())
    assert fine.grid.n_steps == 96
    assert fine.forecast.energy() == pytest.approx(model.forecast.energy())


def test_derived_seeds_are_stable_and_distinct():
    assert derive_seed(42, "pv") == derive_seed(42, "pv")
    assert derive_seed(42, "pv") != derive_seed(42, "wt")
    assert derive_seed(42, "pv") != derive_seed(43, "pv")
