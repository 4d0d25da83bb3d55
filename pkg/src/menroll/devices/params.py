"""Parameter records for the network's devices

All records are immutable and validate themselves on construction.  Each
has a ``from_dict``/``to_dict`` pair matching the scenario JSON layout.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np

from ..core.exceptions import ValidationError
from ..scenario.constants import DEFAULT_DAY_AHEAD_SIGMA_FRACTION, DEFAULT_INTRA_DAY_SIGMA_FRACTION
from ..scenario.forecast import ForecastModel
from ..scenario.timegrid import Profile, TimeGrid, Unit
from .constants import DEFAULT_ETA, DEFAULT_HP_COP, DEFAULT_PWL_SEGMENTS


def _check(condition: bool, message: str, field: str, value: Any = None) -> None:
    if not condition:
        raise ValidationError(message, field=field, value=value)


@dataclass(frozen=True)
class GridTieParams:
    """Tie-line to the upstream grid; negative ``p_min`` allows export"""

    p_min: float
    p_max: float
    price_buy: Profile
    price_sell: Profile
    sigma_gird: float = 0.0

    def __post_init__(self) -> None:
        _check(self.p_min <= self.p_max, "Tie-line lower limit exceeds upper limit", "p_min", self.p_min)
        _check(self.price_buy.grid == self.price_sell.grid, "Buy and sell prices must share a grid", "price_sell")
        _check(
            bool(np.all(self.price_sell.values <= self.price_buy.values + 1e-12)),
            "Sell price above buy price",
            "price_sell",
        )
        _check(self.sigma_gird >= 0, "Exchange cost must be nonnegative", "sigma_gird", self.sigma_gird)

    @property
    def buy_cap(self) -> float:
        return max(self.p_max, 0.0)

    @property
    def sell_cap(self) -> float:
        return max(-self.p_min, 0.0)

    @classmethod
    def from_dict(cls, grid: TimeGrid, data: Dict[str, Any]) -> "GridTieParams":
        return cls(
            p_min=float(data["p_min"]),
            p_max=float(data["p_max"]),
            price_buy=Profile.from_dict(grid, data["price_buy"], Unit.PRICE),
            price_sell=Profile.from_dict(grid, data["price_sell"], Unit.PRICE),
            sigma_gird=float(data.get("sigma_gird", 0.0)),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "p_min": self.p_min,
            "p_max": self.p_max,
            "price_buy": self.price_buy.to_dict(),
            "price_sell": self.price_sell.to_dict(),
            "sigma_gird": self.sigma_gird,
        }


@dataclass(frozen=True)
class GasTurbineParams:
    """Micro gas turbine with cubic fuel cost ``a P^3 + b P^2 + c P + d`` per hour

    Ramp limits are kW per intra-day step.  They also bind on start-up and
    shut-down, so ``p_min`` may not exceed either of them.
    """

    p_min: float
    p_max: float
    fuel_coeffs: Tuple[float, float, float, float]
    cost_up: float = 0.0
    cost_down: float = 0.0
    k_pollution: float = 0.0
    ramp_up: float = float("inf")
    ramp_down: float = float("inf")
    pwl_segments: int = DEFAULT_PWL_SEGMENTS
    initial_on: bool = False
    initial_p: float = 0.0

    def __post_init__(self) -> None:
        _check(0 <= self.p_min <= self.p_max and self.p_max > 0, "Gas turbine needs 0 <= p_min <= p_max and p_max > 0", "p_min", (self.p_min, self.p_max))
        _check(len(self.fuel_coeffs) == 4, "Fuel curve needs four coefficients", "fuel_coeffs", self.fuel_coeffs)
        _check(self.ramp_up > 0 and self.ramp_down > 0, "Ramp limits must be positive", "ramp_up")
        _check(
            self.p_min <= min(self.ramp_up, self.ramp_down),
            "Start-up and shut-down must fit within the ramp limits",
            "ramp_up",
            (self.ramp_up, self.ramp_down),
        )
        _check(self.pwl_segments >= 1, "Need at least one fuel segment", "pwl_segments", self.pwl_segments)
        _check(min(self.cost_up, self.cost_down, self.k_pollution) >= 0, "Costs must be nonnegative", "cost_up")
        if self.initial_on:
            _check(self.p_min <= self.initial_p <= self.p_max, "Initial output outside limits", "initial_p", self.initial_p)
        else:
            _check(self.initial_p == 0, "An idle turbine has zero output", "initial_p", self.initial_p)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GasTurbineParams":
        kwargs = dict(data)
        kwargs["fuel_coeffs"] = tuple(float(c) for c in data["fuel_coeffs"])
        return cls(**kwargs)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "p_min": self.p_min,
            "p_max": self.p_max,
            "fuel_coeffs": list(self.fuel_coeffs),
            "cost_up": self.cost_up,
            "cost_down": self.cost_down,
            "k_pollution": self.k_pollution,
            "ramp_up": self.ramp_up,
            "ramp_down": self.ramp_down,
            "pwl_segments": self.pwl_segments,
            "initial_on": self.initial_on,
            "initial_p": self.initial_p,
        }


@dataclass(frozen=True)
class BatteryParams:
    capacity: float
    p_rated: float
    soc_min: float = 0.1
    soc_max: float = 0.9
    soc_start: float = 0.5
    eta_ch: float = DEFAULT_ETA
    eta_dis: float = DEFAULT_ETA
    k_loss: float = 0.0

    def __post_init__(self) -> None:
        _check(self.capacity > 0, "Battery capacity must be positive", "capacity", self.capacity)
        _check(self.p_rated >= 0, "Rated power must be nonnegative", "p_rated", self.p_rated)
        _check(
            0 <= self.soc_min <= self.soc_start <= self.soc_max <= 1,
            "Battery needs 0 <= soc_min <= soc_start <= soc_max <= 1",
            "soc_start",
            (self.soc_min, self.soc_start, self.soc_max),
        )
        _check(0 < self.eta_ch <= 1 and 0 < self.eta_dis <= 1, "Efficiencies must lie in (0, 1]", "eta_ch")
        _check(self.k_loss >= 0, "Throughput cost must be nonnegative", "k_loss", self.k_loss)

    @property
    def energy_start(self) -> float:
        return self.soc_start * self.capacity

    @property
    def energy_bounds(self) -> Tuple[float, float]:
        return self.soc_min * self.capacity, self.soc_max * self.capacity

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BatteryParams":
        return cls(**data)

    def to_dict(self) -> Dict[str, Any]:
        return dict(self.__dict__)


@dataclass(frozen=True)
class RenewableParams:
    """``n_units`` identical PV panels or wind turbines"""

    n_units: int
    unit_profile: ForecastModel
    intra_sigma_fraction: float = DEFAULT_INTRA_DAY_SIGMA_FRACTION

    def __post_init__(self) -> None:
        _check(self.n_units >= 0, "Unit count must be nonnegative", "n_units", self.n_units)
        _check(self.intra_sigma_fraction >= 0, "Sigma fraction must be nonnegative", "intra_sigma_fraction")

    @property
    def grid(self) -> TimeGrid:
        return self.unit_profile.grid

    def fleet_forecast(self) -> ForecastModel:
        """Forecast of the whole installation"""
        return self.unit_profile.scaled(self.n_units)

    def with_seed(self, seed: int) -> "RenewableParams":
        return RenewableParams(self.n_units, self.unit_profile.with_seed(seed), self.intra_sigma_fraction)

    @classmethod
    def from_dict(cls, grid: TimeGrid, data: Dict[str, Any]) -> "RenewableParams":
        forecast = Profile.from_dict(grid, data["unit_forecast"], Unit.KW)
        seed = int(data.get("seed", 0))
        if "unit_sigma" in data:
            model = ForecastModel(forecast, Profile.from_dict(grid, data["unit_sigma"], Unit.KW), seed)
        else:
            fraction = float(data.get("sigma_fraction", DEFAULT_DAY_AHEAD_SIGMA_FRACTION))
            model = ForecastModel.proportional(forecast, fraction, seed)
        return cls(
            n_units=int(data["n_units"]),
            unit_profile=model,
            intra_sigma_fraction=float(data.get("intra_sigma_fraction", DEFAULT_INTRA_DAY_SIGMA_FRACTION)),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_units": self.n_units,
            "unit_forecast": self.unit_profile.forecast.to_dict(),
            "unit_sigma": self.unit_profile.sigma.to_dict(),
            "seed": self.unit_profile.seed,
            "intra_sigma_fraction": self.intra_sigma_fraction,
        }


@dataclass(frozen=True)
class HeatParams:
    """Heat pump plus lossless heat storage

    The charge and discharge minima apply only while that mode is active.
    """

    hp_q_max: float
    hp_cop: float = DEFAULT_HP_COP
    hs_ch_min: float = 0.0
    hs_ch_max: float = 0.0
    hs_dis_min: float = 0.0
    hs_dis_max: float = 0.0
    hs_capacity: float = 0.0
    hs_soc_start: float = 0.5
    sigma_hp: float = 0.0
    sigma_hs: float = 0.0

    def __post_init__(self) -> None:
        _check(self.hp_q_max >= 0, "Heat pump capacity must be nonnegative", "hp_q_max", self.hp_q_max)
        _check(self.hp_cop > 0, "Heat pump COP must be positive", "hp_cop", self.hp_cop)
        _check(0 <= self.hs_ch_min <= self.hs_ch_max, "Need 0 <= hs_ch_min <= hs_ch_max", "hs_ch_min")
        _check(0 <= self.hs_dis_min <= self.hs_dis_max, "Need 0 <= hs_dis_min <= hs_dis_max", "hs_dis_min")
        _check(self.hs_capacity >= 0, "Storage capacity must be nonnegative", "hs_capacity", self.hs_capacity)
        _check(0 <= self.hs_soc_start <= 1, "Storage start fraction outside [0, 1]", "hs_soc_start", self.hs_soc_start)
        _check(min(self.sigma_hp, self.sigma_hs) >= 0, "Adjustment coefficients must be nonnegative", "sigma_hp")

    @property
    def hs_energy_start(self) -> float:
        return self.hs_soc_start * self.hs_capacity

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "HeatParams":
        return cls(**data)

    def to_dict(self) -> Dict[str, Any]:
        return dict(self.__dict__)


@dataclass(frozen=True)
class DeviceParams:
    """Every device of the network; the optional ones may be None"""

    grid_tie: GridTieParams
    pv: RenewableParams
    wt: RenewableParams
    gas_turbine: Optional[GasTurbineParams] = None
    battery: Optional[BatteryParams] = None
    heat: Optional[HeatParams] = None

    def renewables(self) -> Dict[str, RenewableParams]:
        return {"pv": self.pv, "wt": self.wt}

    @classmethod
    def from_dict(cls, grid: TimeGrid, data: Dict[str, Any]) -> "DeviceParams":
        gt, ess, heat = data.get("gas_turbine"), data.get("battery"), data.get("heat")
        return cls(
            grid_tie=GridTieParams.from_dict(grid, data["grid_tie"]),
            pv=RenewableParams.from_dict(grid, data["pv"]),
            wt=RenewableParams.from_dict(grid, data["wt"]),
            gas_turbine=GasTurbineParams.from_dict(gt) if gt else None,
            battery=BatteryParams.from_dict(ess) if ess else None,
            heat=HeatParams.from_dict(heat) if heat else None,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "grid_tie": self.grid_tie.to_dict(),
            "pv": self.pv.to_dict(),
            "wt": self.wt.to_dict(),
            "gas_turbine": self.gas_turbine.to_dict() if self.gas_turbine else None,
            "battery": self.battery.to_dict() if self.battery else None,
            "heat": self.heat.to_dict() if self.heat else None,
        }
