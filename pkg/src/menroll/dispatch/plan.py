"""Dispatch plans and their cost accounting"""
from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from typing import Dict, Optional

import numpy as np
import pandas as pd

from ..core.exceptions import ValidationError
from ..devices.demand_response import DrDecision, dr_cost
from ..devices.models import gt_fuel_pwl
from ..fleet.aggregation import StationSchedule
from ..scenario.scenario_config import ScenarioConfig
from ..scenario.timegrid import TimeGrid, resample

# Per-step series of a plan, in column order
SERIES = (
    "p_gt", "gt_on", "p_buy", "p_sell", "p_emergency", "p_ess_ch", "p_ess_dis", "ess_soc",
    "p_hp", "q_hp", "h_hs_ch", "h_hs_dis", "hs_soc",
    "p_pv_used", "p_wt_used", "p_pv_avail", "p_wt_avail", "load_e", "load_h", "reserve",
)


@dataclass
class CostBreakdown:
    c_g: float = 0.0
    c_pollu: float = 0.0
    c_gird: float = 0.0
    c_ess: float = 0.0
    c_evc: float = 0.0
    c_dr: float = 0.0
    c_cur: float = 0.0
    c_flat: float = 0.0

    @property
    def total(self) -> float:
        return float(sum(getattr(self, f.name) for f in fields(self)))

    def to_dict(self) -> Dict[str, float]:
        data = {f.name: float(getattr(self, f.name)) for f in fields(self)}
        data["total"] = self.total
        return data


@dataclass
class DispatchPlan:
    """Per-device per-step setpoints on ``grid``

    ``load_e`` and ``load_h`` are the loads after demand response.
    ``p_emergency`` is non-zero only in intra-day traces that fell back to
    emergency purchases.
    """

    grid: TimeGrid
    p_gt: np.ndarray
    gt_on: np.ndarray
    p_buy: np.ndarray
    p_sell: np.ndarray
    p_ess_ch: np.ndarray
    p_ess_dis: np.ndarray
    ess_soc: np.ndarray
    p_hp: np.ndarray
    q_hp: np.ndarray
    h_hs_ch: np.ndarray
    h_hs_dis: np.ndarray
    hs_soc: np.ndarray
    p_pv_used: np.ndarray
    p_wt_used: np.ndarray
    p_pv_avail: np.ndarray
    p_wt_avail: np.ndarray
    load_e: np.ndarray
    load_h: np.ndarray
    dr: DrDecision
    stations: Dict[str, StationSchedule] = field(default_factory=dict)
    reserve: Optional[np.ndarray] = None
    p_emergency: Optional[np.ndarray] = None
    costs: CostBreakdown = field(default_factory=CostBreakdown)
    objective: float = float("nan")

    def __post_init__(self) -> None:
        n = self.grid.n_steps
        if self.reserve is None:
            self.reserve = np.zeros(n)
        if self.p_emergency is None:
            self.p_emergency = np.zeros(n)

    @classmethod
    def idle(cls, grid: TimeGrid) -> "DispatchPlan":
        """All-zero plan, the starting point for assembled traces"""
        zero = np.zeros(grid.n_steps)
        kwargs = {name: zero.copy() for name in SERIES if name not in ("reserve", "p_emergency")}
        return cls(grid=grid, dr=DrDecision.zeros(grid), **kwargs)

    def copy(self) -> "DispatchPlan":
        """Copy with fresh setpoint arrays; profiles and station schedules are shared"""
        series = {name: np.array(getattr(self, name), dtype=float) for name in SERIES}
        return replace(self, stations=dict(self.stations), costs=replace(self.costs), **series)

    # ---------------------------------------------------------------- views
    @property
    def p_curtailed(self) -> np.ndarray:
        return (self.p_pv_avail - self.p_pv_used) + (self.p_wt_avail - self.p_wt_used)

    @property
    def grid_exchange(self) -> np.ndarray:
        return self.p_buy - self.p_sell + self.p_emergency

    @property
    def station_net(self) -> np.ndarray:
        """Station discharge minus charge, summed over stations"""
        total = np.zeros(self.grid.n_steps)
        for sch in self.stations.values():
            total += sch.p_dis.values - sch.p_ch.values
        return total

    def electric_supply(self) -> Dict[str, np.ndarray]:
        return {
            "gas_turbine": self.p_gt,
            "grid_buy": self.p_buy,
            "emergency": self.p_emergency,
            "ess_discharge": self.p_ess_dis,
            "station_discharge": sum((s.p_dis.values for s in self.stations.values()), np.zeros(self.grid.n_steps)),
            "pv": self.p_pv_used,
            "wt": self.p_wt_used,
        }

    def electric_demand(self) -> Dict[str, np.ndarray]:
        return {
            "load": self.load_e,
            "heat_pump": self.p_hp,
            "grid_sell": self.p_sell,
            "ess_charge": self.p_ess_ch,
            "station_charge": sum((s.p_ch.values for s in self.stations.values()), np.zeros(self.grid.n_steps)),
        }

    def electric_residual(self) -> np.ndarray:
        return sum(self.electric_supply().values()) - sum(self.electric_demand().values())

    def thermal_supply(self) -> Dict[str, np.ndarray]:
        return {"heat_pump": self.q_hp, "hs_discharge": self.h_hs_dis}

    def thermal_demand(self) -> Dict[str, np.ndarray]:
        return {"load": self.load_h, "hs_charge": self.h_hs_ch}

    def thermal_residual(self) -> np.ndarray:
        return sum(self.thermal_supply().values()) - sum(self.thermal_demand().values())

    def supply_margin(self) -> np.ndarray:
        """Forecast renewable headroom, the quantity the reserve requirement bounds"""
        return self.p_curtailed

    # --------------------------------------------------------------- export
    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({"step": np.arange(self.grid.n_steps), "hour": self.grid.hours()})
        for name in SERIES:
            frame[name] = getattr(self, name)
        frame["p_curtailed"] = self.p_curtailed
        for name in ("shift_in", "shift_out", "curtail_e", "curtail_h"):
            frame[f"dr_{name}"] = getattr(self.dr, name).values
        for sid, sch in sorted(self.stations.items()):
            frame[f"{sid}_p_ch"] = sch.p_ch.values
            frame[f"{sid}_p_dis"] = sch.p_dis.values
            frame[f"{sid}_soc"] = sch.soc.values
        return frame


def starts_and_stops(on: np.ndarray, initial_on: bool) -> tuple:
    on = np.round(np.asarray(on, dtype=float))
    prev = np.concatenate(([1.0 if initial_on else 0.0], on[:-1]))
    change = on - prev
    return int(np.sum(change > 0.5)), int(np.sum(change < -0.5))


def compute_costs(plan: DispatchPlan, cfg: ScenarioConfig, dr_enabled: bool = True) -> CostBreakdown:
    """Recompute every cost term from the plan's setpoints

    Prices on the scenario's day-ahead grid are resampled to the plan's grid.
    """
    dt = plan.grid.dt_hours
    dev = cfg.devices
    costs = CostBreakdown()

    gt = dev.gas_turbine
    if gt is not None:
        on = np.round(plan.gt_on)
        curve = gt_fuel_pwl(gt)
        fuel = np.where(on > 0.5, curve(np.clip(plan.p_gt, gt.p_min, gt.p_max)), 0.0)
        n_up, n_down = starts_and_stops(on, gt.initial_on)
        costs.c_g = float(np.sum(fuel) * dt + gt.cost_up * n_up + gt.cost_down * n_down)
        costs.c_pollu = float(gt.k_pollution * np.sum(plan.p_gt) * dt)

    tie = dev.grid_tie
    buy_price = resample(tie.price_buy, plan.grid).values
    sell_price = resample(tie.price_sell, plan.grid).values
    costs.c_gird = float(
        np.sum(plan.p_buy * buy_price - plan.p_sell * sell_price) * dt
        + tie.sigma_gird * np.sum(plan.p_buy + plan.p_sell) * dt
    )

    if dev.battery is not None:
        costs.c_ess = float(dev.battery.k_loss * np.sum(np.abs(plan.p_ess_dis - plan.p_ess_ch)) * dt)

    throughput = sum(float(np.sum(s.p_ch.values + s.p_dis.values)) for s in plan.stations.values())
    costs.c_evc = float(cfg.prices.c_evc * throughput * dt)
    costs.c_dr = dr_cost(plan.dr, cfg.dr) if dr_enabled else 0.0
    costs.c_cur = float(cfg.prices.lambda_cur * np.sum(plan.p_curtailed) * dt)
    if cfg.prices.flatness_weight > 0:
        exchange = plan.grid_exchange
        costs.c_flat = float(cfg.prices.flatness_weight * (exchange.max() - exchange.min()))
    return costs


def peak_valley_metric(load_served_by_grid) -> tuple:
    """``(peak, valley, peak - valley)`` of a grid-exchange profile"""
    values = np.asarray(getattr(load_served_by_grid, "values", load_served_by_grid), dtype=float)
    if values.size == 0:
        raise ValidationError("Peak-valley metric of an empty profile", field="load_served_by_grid")
    peak, valley = float(values.max()), float(values.min())
    return peak, valley, peak - valley
