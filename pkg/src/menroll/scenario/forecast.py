"""Renewable forecast error model and seeded sampling"""
from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from ..core.exceptions import ValidationError
from .timegrid import Profile, TimeGrid, Unit, resample


def make_rng(seed: int, offset: int = 0) -> np.random.Generator:
    """PCG64 generator keyed by ``(seed, offset)``"""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(offset)])))


def derive_seed(seed: int, label: str) -> int:
    """Stable child seed for a named stream (e.g. ``"pv"``)"""
    state = np.random.SeedSequence([int(seed), zlib.crc32(label.encode("utf-8"))]).generate_state(1)
    return int(state[0])


@dataclass(frozen=True)
class ForecastModel:
    """Point forecast plus per-step error standard deviation"""

    forecast: Profile
    sigma: Profile
    seed: int = 0

    def __post_init__(self) -> None:
        if self.forecast.grid != self.sigma.grid:
            raise ValidationError("Forecast and sigma must share a grid", field="sigma")
        if np.any(self.sigma.values < 0):
            raise ValidationError("Forecast error sigma must be nonnegative", field="sigma")
        if self.seed < 0:
            raise ValidationError("Seed must be unsigned", field="seed", value=self.seed)

    @classmethod
    def proportional(cls, forecast: Profile, fraction: float, seed: int = 0) -> "ForecastModel":
        """Error sigma as ``fraction`` of the forecast at each step"""
        if fraction < 0:
            raise ValidationError("Sigma fraction must be nonnegative", field="sigma_fraction", value=fraction)
        return cls(forecast, Profile(forecast.grid, np.abs(forecast.values) * fraction, Unit.KW), seed)

    @property
    def grid(self) -> TimeGrid:
        return self.forecast.grid

    def scaled(self, factor: float) -> "ForecastModel":
        """Forecast of ``factor`` co-located identical units (errors fully correlated)"""
        return ForecastModel(self.forecast.scaled(factor), self.sigma.scaled(abs(factor)), self.seed)

    def with_seed(self, seed: int) -> "ForecastModel":
        return ForecastModel(self.forecast, self.sigma, seed)

    def on_grid(self, grid: TimeGrid) -> "ForecastModel":
        return ForecastModel(resample(self.forecast, grid), resample(self.sigma, grid), self.seed)


def sample_realization(fm: ForecastModel, seed_offset: int = 0) -> Profile:
    """Forecast plus one Gaussian error draw, clamped at zero

    A pure function of ``(fm, seed_offset)``.
    """
    rng = make_rng(fm.seed, seed_offset)
    errors = rng.standard_normal(fm.grid.n_steps) * fm.sigma.values
    return Profile(fm.grid, np.maximum(fm.forecast.values + errors, 0.0), fm.forecast.unit)


def std_normal_quantile(eta: float) -> float:
    """Inverse standard normal CDF"""
    if not 0.0 < eta < 1.0:
        raise ValidationError("Quantile level must lie strictly between 0 and 1", field="eta", value=eta)
    if eta == 0.5:
        return 0.0
    return float(norm.ppf(eta))
