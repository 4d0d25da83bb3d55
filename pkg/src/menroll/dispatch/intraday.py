"""Intra-day rolling adjustment of a day-ahead plan

At every intra-day step the controller re-solves a short window that keeps
all setpoints as close as possible to the day-ahead reference (weighted
absolute deviations), given fresh renewable forecasts.  Only the first
``execute_steps`` of the window are executed, the storage states are
updated from what was executed, and the window moves on.

Gas turbine commitment and demand response decisions stay as planned the
day before; only output levels adjust.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from ..core.exceptions import ConfigurationError, RollingError, SolverError, SolverLimitError, ValidationError
from ..core.logging_utils import get_logger
from ..devices.constraints import (
    BatteryVars,
    GasTurbineVars,
    GridTieVars,
    HeatVars,
    StationVars,
    add_battery,
    add_gas_turbine,
    add_grid_tie,
    add_heat,
    add_renewable,
    add_station,
)
from ..devices.demand_response import DrDecision
from ..devices.models import battery_power_caps
from ..fleet.aggregation import StationEnvelope, StationSchedule
from ..milp.linearize import add_abs
from ..milp.model import LinExpr, MilpModel, Sense, Solution, Variable, lin_sum
from ..milp.solvers import SolverOptions, solve
from ..scenario.forecast import ForecastModel, sample_realization
from ..scenario.scenario_config import ScenarioConfig
from ..scenario.timegrid import Profile, TimeGrid, Unit, resample
from .constants import (
    CLIP_TOLERANCE,
    DEFAULT_C_EVC,
    DEFAULT_EMERGENCY_RATE,
    DEFAULT_EXECUTE_STEPS,
    DEFAULT_SIGMA_ESS,
    DEFAULT_SIGMA_GIRD,
    DEFAULT_SIGMA_GT,
    DEFAULT_SIGMA_NEW,
    DEFAULT_WINDOW_STEPS,
    PROGRESS_EVERY,
)
from .plan import DispatchPlan, compute_costs

logger = get_logger(__name__)

TECHS = ("pv", "wt")


@dataclass(frozen=True)
class RollingConfig:
    """Window geometry and adjustment coefficients (currency per kWh of deviation)"""

    window_steps: int = DEFAULT_WINDOW_STEPS
    execute_steps: int = DEFAULT_EXECUTE_STEPS
    sigma_ess: float = DEFAULT_SIGMA_ESS
    sigma_gt: float = DEFAULT_SIGMA_GT
    sigma_gird: float = DEFAULT_SIGMA_GIRD
    c_evc: float = DEFAULT_C_EVC
    sigma_hs: float = 0.0
    sigma_hp: float = 0.0
    sigma_new: float = DEFAULT_SIGMA_NEW
    emergency_rate: float = DEFAULT_EMERGENCY_RATE

    def __post_init__(self) -> None:
        if self.window_steps <= 0 or self.execute_steps <= 0:
            raise ConfigurationError("Window and execute steps must be positive", setting="rolling.window_steps")
        if self.execute_steps > self.window_steps:
            raise ConfigurationError("Cannot execute more steps than the window holds", setting="rolling.execute_steps")
        coefficients = (self.sigma_ess, self.sigma_gt, self.sigma_gird, self.c_evc, self.sigma_hs, self.sigma_hp, self.sigma_new)
        if min(coefficients) < 0 or self.emergency_rate < 0:
            raise ConfigurationError("Adjustment coefficients must be nonnegative", setting="rolling")

    @classmethod
    def for_scenario(cls, cfg: ScenarioConfig, **overrides: Any) -> "RollingConfig":
        """Scenario ``rolling`` block, heat coefficients from the heat system, then ``overrides``"""
        values: Dict[str, Any] = {}
        if cfg.devices.heat is not None:
            values["sigma_hs"] = cfg.devices.heat.sigma_hs
            values["sigma_hp"] = cfg.devices.heat.sigma_hp
        values.update(cfg.rolling)
        values.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return cls(**values)
        except TypeError as exc:
            raise ConfigurationError(f"Unknown rolling setting: {exc}", setting="rolling") from exc

    def to_dict(self) -> Dict[str, Any]:
        return dict(self.__dict__)


@dataclass(frozen=True)
class SystemState:
    """Storage levels and turbine status at the start of ``step``"""

    step: int
    ess_soc: float
    station_soc: Dict[str, float]
    hs_soc: float
    gt_on: bool
    p_gt_prev: float

    @classmethod
    def initial(cls, cfg: ScenarioConfig, station_ids: Sequence[str]) -> "SystemState":
        dev = cfg.devices
        return cls(
            step=0,
            ess_soc=dev.battery.energy_start if dev.battery else 0.0,
            station_soc={sid: 0.0 for sid in station_ids},
            hs_soc=dev.heat.hs_energy_start if dev.heat else 0.0,
            gt_on=bool(dev.gas_turbine.initial_on) if dev.gas_turbine else False,
            p_gt_prev=float(dev.gas_turbine.initial_p) if dev.gas_turbine else 0.0,
        )


@dataclass
class WindowRecord:
    step: int
    status: str
    objective: float


@dataclass
class ExecutionTrace:
    """What was actually run on the intra-day grid

    ``forecasts`` holds, per technology, the forecast of each step issued
    one step earlier; ``ledger`` lists every emergency event.
    """

    executed: DispatchPlan
    reference: DispatchPlan
    realization: Dict[str, np.ndarray]
    forecasts: Dict[str, np.ndarray]
    windows: List[WindowRecord] = field(default_factory=list)
    ledger: List[Dict[str, Any]] = field(default_factory=list)
    strategy: str = "rolling"

    @property
    def grid(self) -> TimeGrid:
        return self.executed.grid

    @property
    def committed(self) -> DispatchPlan:
        """The schedule the run answers for: the day-ahead reference for a
        verbatim run, the re-dispatched setpoints for a rolling one"""
        return self.reference if self.strategy == "day-ahead" else self.executed

    def adjustment_costs(self, rc: RollingConfig) -> Dict[str, float]:
        """Executed deviation costs: ``c_g`` (electric side), ``c_h`` (heat side)"""
        return adjustment_costs(self.executed, self.reference, rc)

    def emergency_cost(self) -> float:
        return float(sum(event["cost"] for event in self.ledger))


def adjustment_costs(executed: DispatchPlan, reference: DispatchPlan, rc: RollingConfig) -> Dict[str, float]:
    dt = executed.grid.dt_hours

    def dev(a: np.ndarray, b: np.ndarray) -> float:
        return float(np.sum(np.abs(a - b)) * dt)

    c_g = rc.sigma_ess * dev(executed.p_ess_dis - executed.p_ess_ch, reference.p_ess_dis - reference.p_ess_ch)
    c_g += rc.sigma_gt * dev(executed.p_gt, reference.p_gt)
    c_g += rc.sigma_gird * dev(executed.p_buy - executed.p_sell, reference.p_buy - reference.p_sell)
    for sid, sch in executed.stations.items():
        ref = reference.stations[sid]
        c_g += rc.c_evc * (dev(sch.p_ch.values, ref.p_ch.values) + dev(sch.p_dis.values, ref.p_dis.values))
    c_g += rc.sigma_new * (dev(executed.p_pv_used, reference.p_pv_used) + dev(executed.p_wt_used, reference.p_wt_used))
    c_h = rc.sigma_hs * dev(executed.h_hs_dis - executed.h_hs_ch, reference.h_hs_dis - reference.h_hs_ch)
    c_h += rc.sigma_hp * dev(executed.q_hp, reference.q_hp)
    return {"c_g": c_g, "c_h": c_h, "c_total": c_g + c_h}


# ------------------------------------------------------------------ reference
def _recursion(start: float, gain: np.ndarray) -> np.ndarray:
    return start + np.cumsum(gain)


def reference_plan(plan: DispatchPlan, cfg: ScenarioConfig, envelopes: Sequence[StationEnvelope]) -> DispatchPlan:
    """Day-ahead plan held piecewise constant on the intra-day grid

    Storage levels are re-integrated on the fine grid so they obey the fine
    recursions; at coarse step boundaries they equal the day-ahead values.
    """
    fine = envelopes[0].grid if envelopes else cfg.intra_day_grid
    k = plan.grid.ratio_to(fine)
    dt = fine.dt_hours
    rep = lambda a: np.repeat(np.asarray(a, dtype=float), k)  # noqa: E731

    ref = DispatchPlan.idle(fine)
    for name in ("p_gt", "gt_on", "p_buy", "p_sell", "p_ess_ch", "p_ess_dis", "p_hp", "q_hp", "h_hs_ch",
                 "h_hs_dis", "p_pv_used", "p_wt_used", "p_pv_avail", "p_wt_avail", "load_e", "load_h", "reserve"):
        setattr(ref, name, rep(getattr(plan, name)))
    ref.dr = DrDecision(*(resample(getattr(plan.dr, n), fine) for n in ("shift_in", "shift_out", "curtail_e", "curtail_h")))

    dev = cfg.devices
    if dev.battery:
        b = dev.battery
        ref.ess_soc = _recursion(b.energy_start, b.eta_ch * ref.p_ess_ch * dt - ref.p_ess_dis * dt / b.eta_dis)
    if dev.heat:
        ref.hs_soc = _recursion(dev.heat.hs_energy_start, (ref.h_hs_ch - ref.h_hs_dis) * dt)
    for env in envelopes:
        coarse = plan.stations[env.station_id]
        p_ch, p_dis = rep(coarse.p_ch.values), rep(coarse.p_dis.values)
        gain = env.delta_s.values + env.eta_ch * p_ch * dt - env.eta_ref * p_dis * dt / env.eta_dis
        ref.stations[env.station_id] = StationSchedule.from_arrays(fine, p_ch, p_dis, _recursion(0.0, gain))
    ref.costs = compute_costs(ref, cfg)
    ref.objective = plan.objective
    return ref


# --------------------------------------------------------------- realization
def sample_realizations(cfg: ScenarioConfig, grid: Optional[TimeGrid] = None) -> Dict[str, Profile]:
    """One seeded draw of installation output per technology on ``grid``"""
    grid = grid or cfg.intra_day_grid
    return {tech: sample_realization(cfg.renewable_forecast(tech).on_grid(grid), 0) for tech in TECHS}


def fresh_forecast(cfg: ScenarioConfig, tech: str, realization: Profile, step: int) -> np.ndarray:
    """Forecast issued at ``step``: the realization now, noisy realization later"""
    params = cfg.devices.renewables()[tech]
    grid = realization.grid
    base = resample(params.fleet_forecast().forecast, grid)
    sigma = Profile(grid, np.abs(base.values) * params.intra_sigma_fraction, Unit.KW)
    seed = params.unit_profile.seed
    values = sample_realization(ForecastModel(realization, sigma, seed), seed_offset=step + 1).values.copy()
    values[step] = realization[step]
    return values


# ------------------------------------------------------------------- windows
@dataclass
class WindowModel:
    model: MilpModel
    steps: range
    tie: GridTieVars
    pv: List[Variable]
    wt: List[Variable]
    gt: Optional[GasTurbineVars] = None
    ess: Optional[BatteryVars] = None
    heat: Optional[HeatVars] = None
    stations: List[StationVars] = field(default_factory=list)
    emergency: List[Variable] = field(default_factory=list)


def _terminal(model: MilpModel, var: Variable, target: float, elastic: bool, rate: float, name: str) -> None:
    if not elastic:
        model.fix(var, target)
        return
    up = model.add_var(f"{name}_up")
    dn = model.add_var(f"{name}_dn")
    model.add_constraint(var + up - dn, Sense.EQ, target, name)
    model.add_objective(rate * (up + dn))


def build_window_model(
    cfg: ScenarioConfig,
    rc: RollingConfig,
    state: SystemState,
    reference: DispatchPlan,
    fresh: Dict[str, np.ndarray],
    window: range,
    envelopes: Sequence[StationEnvelope],
    elastic: bool = False,
) -> WindowModel:
    """Adjustment model over ``window`` anchored at ``state``

    Cyclic storage targets apply only when the window reaches the end of the
    horizon.  With ``elastic`` the tie-line gets an unbounded emergency
    purchase and terminal targets become soft, both at ``emergency_rate``.

    Raises:
        ValidationError: if the window does not start at the state's step or
            leaves the reference grid
    """
    grid = reference.grid
    if window.start != state.step or window.stop > grid.n_steps or len(window) == 0:
        raise ValidationError("Window does not match the state and reference", field="window",
                              value=(window.start, window.stop))
    dt = grid.dt_hours
    dev = cfg.devices
    at_end = window.stop == grid.n_steps
    model = MilpModel(f"window[{window.start}:{window.stop}]{'-elastic' if elastic else ''}")
    steps = list(window)

    tie = add_grid_tie(model, dev.grid_tie, steps)
    gt = None
    if dev.gas_turbine:
        gt = add_gas_turbine(model, dev.gas_turbine, steps, commitment=reference.gt_on[window.start:window.stop],
                             p_prev=state.p_gt_prev, on_prev=state.gt_on)
    ess = heat = None
    if dev.battery:
        ess = add_battery(model, dev.battery, steps, dt, e_start=state.ess_soc)
        if at_end:
            _terminal(model, ess.energy[-1], dev.battery.energy_start, elastic, rc.emergency_rate, "ess_terminal")
    stations = []
    for env in envelopes:
        st = add_station(model, env, steps, s_prev=state.station_soc[env.station_id])
        if at_end:
            _terminal(model, st.soc[-1], env.terminal_withdrawal, elastic, rc.emergency_rate, f"st_{env.station_id}_terminal")
        stations.append(st)
    if dev.heat:
        heat = add_heat(model, dev.heat, steps, dt, e_start=state.hs_soc)
        if at_end:
            _terminal(model, heat.hs_energy[-1], dev.heat.hs_energy_start, elastic, rc.emergency_rate, "hs_terminal")
    pv = add_renewable(model, fresh["pv"][window.start:window.stop], steps, "pv")
    wt = add_renewable(model, fresh["wt"][window.start:window.stop], steps, "wt")
    wm = WindowModel(model, window, tie, pv, wt, gt, ess, heat, stations)

    terms: List[LinExpr] = []

    def penalize(x, ref_value: float, weight: float, name: str) -> None:
        if weight > 0:
            terms.append((weight * dt) * add_abs(model, x - float(ref_value), name=name))

    for i, t in enumerate(steps):
        balance = tie.net(i) + pv[i] + wt[i]
        if gt:
            balance += gt.p[i]
        if ess:
            balance += ess.dis[i] - ess.ch[i]
        for st in stations:
            balance += st.dis[i] - st.ch[i]
        if heat:
            balance -= heat.p_hp[i]
        if elastic:
            em = model.add_var(f"emergency[{t}]")
            balance += em
            wm.emergency.append(em)
            terms.append((rc.emergency_rate * dt) * em)
        model.add_constraint(balance, Sense.EQ, float(reference.load_e[t]), f"electric_balance[{t}]")
        if heat:
            model.add_constraint(heat.q_hp[i] + heat.hs_dis[i] - heat.hs_ch[i], Sense.EQ,
                                 float(reference.load_h[t]), f"thermal_balance[{t}]")

        penalize(tie.net(i), reference.p_buy[t] - reference.p_sell[t], rc.sigma_gird, f"dev_grid[{t}]")
        penalize(pv[i], reference.p_pv_used[t], rc.sigma_new, f"dev_pv[{t}]")
        penalize(wt[i], reference.p_wt_used[t], rc.sigma_new, f"dev_wt[{t}]")
        if gt:
            penalize(gt.p[i], reference.p_gt[t], rc.sigma_gt, f"dev_gt[{t}]")
        if ess:
            penalize(ess.dis[i] - ess.ch[i], reference.p_ess_dis[t] - reference.p_ess_ch[t], rc.sigma_ess, f"dev_ess[{t}]")
        for st in stations:
            ref = reference.stations[st.envelope.station_id]
            penalize(st.ch[i], ref.p_ch[t], rc.c_evc, f"dev_{st.envelope.station_id}_ch[{t}]")
            penalize(st.dis[i], ref.p_dis[t], rc.c_evc, f"dev_{st.envelope.station_id}_dis[{t}]")
        if heat:
            penalize(heat.hs_dis[i] - heat.hs_ch[i], reference.h_hs_dis[t] - reference.h_hs_ch[t], rc.sigma_hs, f"dev_hs[{t}]")
            penalize(heat.q_hp[i], reference.q_hp[t], rc.sigma_hp, f"dev_hp[{t}]")
    model.add_objective(lin_sum(terms))
    return wm




# ------------------------------------------------------------------ execution
class _TraceBuilder:
    """Executed setpoints filled in step by step"""

    def __init__(self, reference: DispatchPlan, envelopes: Sequence[StationEnvelope]) -> None:
        self.plan = DispatchPlan.idle(reference.grid)
        for name in ("gt_on", "load_e", "load_h", "reserve", "p_pv_avail", "p_wt_avail"):
            setattr(self.plan, name, getattr(reference, name).copy())
        self.plan.dr = reference.dr
        n = reference.grid.n_steps
        self.station = {env.station_id: (np.zeros(n), np.zeros(n), np.zeros(n)) for env in envelopes}

    def take(self, wm: WindowModel, solution: Solution, t: int, avail: Dict[str, float]) -> None:
        """Copy step ``t`` of a window solution, clipping renewables to what is there"""
        i = t - wm.steps.start
        val = lambda v: max(solution[v], 0.0)  # noqa: E731
        p = self.plan
        p.p_buy[t] = val(wm.tie.buy[i])
        p.p_sell[t] = val(wm.tie.sell[i])
        planned = {"pv": val(wm.pv[i]), "wt": val(wm.wt[i])}
        p.p_pv_used[t] = min(planned["pv"], avail["pv"])
        p.p_wt_used[t] = min(planned["wt"], avail["wt"])
        if wm.emergency:
            p.p_emergency[t] = val(wm.emergency[i])
        # output forecast for a later executed step may not materialize
        missing = planned["pv"] - p.p_pv_used[t] + planned["wt"] - p.p_wt_used[t]
        if missing > CLIP_TOLERANCE:
            p.p_emergency[t] += missing
        if wm.gt:
            p.p_gt[t] = val(wm.gt.p[i])
        if wm.ess:
            p.p_ess_ch[t] = val(wm.ess.ch[i])
            p.p_ess_dis[t] = val(wm.ess.dis[i])
        if wm.heat:
            p.q_hp[t] = val(wm.heat.q_hp[i])
            p.p_hp[t] = val(wm.heat.p_hp[i])
            p.h_hs_ch[t] = val(wm.heat.hs_ch[i])
            p.h_hs_dis[t] = val(wm.heat.hs_dis[i])
        for st in wm.stations:
            p_ch, p_dis, _ = self.station[st.envelope.station_id]
            p_ch[t] = val(st.ch[i])
            p_dis[t] = val(st.dis[i])

    def hold(self, cfg: ScenarioConfig, reference: DispatchPlan, state: SystemState, t: int,
             avail: Dict[str, float], envelopes: Sequence[StationEnvelope]) -> None:
        """Run the reference step as far as device limits allow; any deficit is an emergency purchase"""
        dev = cfg.devices
        p = self.plan
        dt = p.grid.dt_hours
        p.p_pv_used[t] = min(reference.p_pv_used[t], avail["pv"])
        p.p_wt_used[t] = min(reference.p_wt_used[t], avail["wt"])
        if dev.gas_turbine:
            g = dev.gas_turbine
            hi = min(g.p_max * p.gt_on[t], state.p_gt_prev + g.ramp_up)
            lo = min(max(g.p_min * p.gt_on[t], state.p_gt_prev - g.ramp_down), hi)
            p.p_gt[t] = float(np.clip(reference.p_gt[t], lo, hi))
        if dev.battery:
            b = dev.battery
            cap_ch, cap_dis = battery_power_caps(b, float(np.clip(state.ess_soc / b.capacity, 0.0, 1.0)), dt)
            p.p_ess_ch[t] = min(reference.p_ess_ch[t], cap_ch)
            p.p_ess_dis[t] = min(reference.p_ess_dis[t], cap_dis)
        if dev.heat:
            h = dev.heat
            p.h_hs_ch[t] = min(reference.h_hs_ch[t], max(h.hs_capacity - state.hs_soc, 0.0) / dt)
            p.h_hs_dis[t] = min(reference.h_hs_dis[t], max(state.hs_soc, 0.0) / dt)
            p.q_hp[t] = float(np.clip(p.load_h[t] + p.h_hs_ch[t] - p.h_hs_dis[t], 0.0, h.hp_q_max))
            p.p_hp[t] = p.q_hp[t] / h.hp_cop
        for env in envelopes:
            p_ch, p_dis, _ = self.station[env.station_id]
            ref = reference.stations[env.station_id]
            p_ch[t] = min(ref.p_ch[t], env.p_ch_max[t])
            p_dis[t] = min(ref.p_dis[t], env.p_dis_max[t])

        p.p_buy[t], p.p_sell[t] = reference.p_buy[t], reference.p_sell[t]
        station_net = sum(self.station[sid][1][t] - self.station[sid][0][t] for sid in self.station)
        supply = (p.p_gt[t] + p.p_buy[t] - p.p_sell[t] + p.p_ess_dis[t] - p.p_ess_ch[t]
                  + station_net + p.p_pv_used[t] + p.p_wt_used[t])
        gap = p.load_e[t] + p.p_hp[t] - supply
        tie = dev.grid_tie
        if gap > 0:
            from_sell = min(gap, p.p_sell[t])
            p.p_sell[t] -= from_sell
            gap -= from_sell
            extra = min(gap, max(tie.buy_cap - p.p_buy[t], 0.0))
            p.p_buy[t] += extra
            p.p_emergency[t] = gap - extra
            return
        surplus = -gap
        for name in ("p_buy", "p_pv_used", "p_wt_used"):
            series = getattr(p, name)
            cut = min(surplus, series[t])
            series[t] -= cut
            surplus -= cut
        if surplus > 0:
            absorbed = min(surplus, max(tie.sell_cap - p.p_sell[t], 0.0))
            p.p_sell[t] += absorbed
            if surplus - absorbed > 0:
                logger.warning(f"Step {t}: {surplus - absorbed:.3f} kW surplus left after holding the reference")

    def advance(self, cfg: ScenarioConfig, state: SystemState, t: int,
                envelopes: Sequence[StationEnvelope]) -> SystemState:
        """Integrate storage over executed step ``t`` and return the next state"""
        p = self.plan
        dt = p.grid.dt_hours
        dev = cfg.devices
        ess_soc, hs_soc = state.ess_soc, state.hs_soc
        if dev.battery:
            b = dev.battery
            ess_soc += b.eta_ch * p.p_ess_ch[t] * dt - p.p_ess_dis[t] * dt / b.eta_dis
            p.ess_soc[t] = ess_soc
        if dev.heat:
            hs_soc += (p.h_hs_ch[t] - p.h_hs_dis[t]) * dt
            p.hs_soc[t] = hs_soc
        station_soc = dict(state.station_soc)
        for env in envelopes:
            p_ch, p_dis, soc = self.station[env.station_id]
            station_soc[env.station_id] += (
                env.delta_s[t] + env.eta_ch * p_ch[t] * dt - env.eta_ref * p_dis[t] * dt / env.eta_dis
            )
            soc[t] = station_soc[env.station_id]
        return SystemState(
            step=t + 1,
            ess_soc=float(ess_soc),
            station_soc={k: float(v) for k, v in station_soc.items()},
            hs_soc=float(hs_soc),
            gt_on=bool(p.gt_on[t] > 0.5),
            p_gt_prev=float(p.p_gt[t]),
        )

    def finish(self, cfg: ScenarioConfig) -> DispatchPlan:
        p = self.plan
        for sid, (p_ch, p_dis, soc) in self.station.items():
            p.stations[sid] = StationSchedule.from_arrays(p.grid, p_ch, p_dis, soc)
        p.costs = compute_costs(p, cfg)
        p.objective = p.costs.total
        return p


def _solve_window(wm: WindowModel, options: Optional[SolverOptions]) -> Optional[Solution]:
    try:
        solution = solve(wm.model, options)
    except SolverLimitError as exc:
        solution = exc.incumbent
    except SolverError as exc:
        logger.warning(f"{wm.model.name}: {exc}")
        return None
    return solution if solution is not None and solution.is_optimal else None


def roll(
    cfg: ScenarioConfig,
    plan: DispatchPlan,
    rc: Optional[RollingConfig] = None,
    options: Optional[SolverOptions] = None,
    realization: Optional[Dict[str, Profile]] = None,
) -> ExecutionTrace:
    """Rolling-horizon execution of a day-ahead plan over the intra-day grid

    An infeasible window is re-solved with emergency purchases and soft
    terminal targets; if that fails too the reference step is held within
    device limits.  Every emergency is recorded in the trace ledger.
    """
    rc = rc or RollingConfig.for_scenario(cfg)
    grid = cfg.intra_day_grid
    envelopes = cfg.envelopes(grid)
    reference = reference_plan(plan, cfg, envelopes)
    realization = realization or sample_realizations(cfg, grid)
    for tech in TECHS:
        if tech not in realization or realization[tech].grid != grid:
            raise RollingError("Realization does not cover the intra-day grid", details=tech, step=0)
    actual = {tech: realization[tech].values for tech in TECHS}
    dt = grid.dt_hours
    n = grid.n_steps

    builder = _TraceBuilder(reference, envelopes)
    forecasts = {tech: reference.p_pv_avail.copy() if tech == "pv" else reference.p_wt_avail.copy() for tech in TECHS}
    trace = ExecutionTrace(builder.plan, reference, actual, forecasts)
    state = SystemState.initial(cfg, [env.station_id for env in envelopes])
    logger.info(f"Rolling over {n} steps: window {rc.window_steps}, executing {rc.execute_steps} per solve")

    k = 0
    while k < n:
        window = range(k, min(k + rc.window_steps, n))
        fresh = {tech: fresh_forecast(cfg, tech, realization[tech], k) for tech in TECHS}
        for tech in TECHS:
            if k + 1 < n:
                forecasts[tech][k + 1] = fresh[tech][k + 1]

        status = "optimal"
        wm = build_window_model(cfg, rc, state, reference, fresh, window, envelopes)
        solution = _solve_window(wm, options)
        if solution is None:
            logger.warning(f"Window at step {k} infeasible; retrying with emergency purchases")
            wm = build_window_model(cfg, rc, state, reference, fresh, window, envelopes, elastic=True)
            solution = _solve_window(wm, options)
            status = "emergency" if solution is not None else "hold"
        trace.windows.append(WindowRecord(k, status, solution.objective if solution is not None else float("nan")))

        for t in range(k, min(k + rc.execute_steps, n)):
            avail = {tech: float(actual[tech][t]) for tech in TECHS}
            if solution is not None:
                builder.take(wm, solution, t, avail)
            else:
                builder.hold(cfg, reference, state, t, avail, envelopes)
            if builder.plan.p_emergency[t] > 0:
                energy = float(builder.plan.p_emergency[t] * dt)
                kind = "shortfall" if status == "optimal" else status
                trace.ledger.append({"step": t, "kind": kind, "energy_kwh": energy,
                                     "cost": energy * rc.emergency_rate})
                logger.warning(f"Step {t}: emergency purchase of {energy:.3f} kWh ({kind})")
            state = builder.advance(cfg, state, t, envelopes)
        k = state.step
        if k % PROGRESS_EVERY == 0 or k >= n:
            logger.info(f"Rolling progress: {k}/{n} steps executed")

    builder.finish(cfg)
    costs = trace.adjustment_costs(rc)
    logger.info(
        f"Rolling done: adjustment cost {costs['c_total']:.4f} (electric {costs['c_g']:.4f}, "
        f"heat {costs['c_h']:.4f}), {len(trace.ledger)} emergency events"
    )
    return trace


def execute_verbatim(
    cfg: ScenarioConfig,
    plan: DispatchPlan,
    realization: Dict[str, Profile],
    rc: Optional[RollingConfig] = None,
) -> ExecutionTrace:
    """Run the day-ahead plan unchanged on the intra-day grid

    Renewable output is what the plan committed, capped at what actually
    materialized; a shortfall is covered by emergency purchase and recorded.
    """
    rc = rc or RollingConfig.for_scenario(cfg)
    grid = next(iter(realization.values())).grid
    envelopes = cfg.envelopes(grid)
    reference = reference_plan(plan, cfg, envelopes)
    actual = {tech: realization[tech].values for tech in TECHS}
    dt = grid.dt_hours

    executed = reference.copy()
    executed.p_pv_used = np.minimum(reference.p_pv_used, actual["pv"])
    executed.p_wt_used = np.minimum(reference.p_wt_used, actual["wt"])
    shortfall = (reference.p_pv_used - executed.p_pv_used) + (reference.p_wt_used - executed.p_wt_used)
    executed.p_emergency = shortfall
    executed.costs = compute_costs(executed, cfg)
    executed.objective = executed.costs.total

    forecasts = {"pv": reference.p_pv_avail.copy(), "wt": reference.p_wt_avail.copy()}
    trace = ExecutionTrace(executed, reference, actual, forecasts, strategy="day-ahead")
    for t in np.flatnonzero(shortfall > 0):
        energy = float(shortfall[t] * dt)
        trace.ledger.append({"step": int(t), "kind": "shortfall", "energy_kwh": energy,
                             "cost": energy * rc.emergency_rate})
    logger.info(f"Day-ahead plan executed verbatim: {len(trace.ledger)} shortfall steps")
    return trace


# ------------------------------------------------------------------ deviation
@dataclass
class DeviationReport:
    """Committed renewable output against what could be delivered"""

    grid: TimeGrid
    committed: Dict[str, np.ndarray]
    deliverable: Dict[str, np.ndarray]
    penalty_rate: float

    def shortage(self, tech: str) -> np.ndarray:
        return np.maximum(self.committed[tech] - self.deliverable[tech], 0.0)

    def cost(self, tech: str) -> float:
        return float(self.penalty_rate * np.sum(self.shortage(tech)) * self.grid.dt_hours)

    @property
    def total_cost(self) -> float:
        return sum(self.cost(tech) for tech in self.committed)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {f"cost_{tech}": self.cost(tech) for tech in self.committed}
        data.update({f"shortage_kwh_{tech}": float(np.sum(self.shortage(tech)) * self.grid.dt_hours)
                     for tech in self.committed})
        data["total_cost"] = self.total_cost
        return data


def assess_deviation(
    executed: Union[DispatchPlan, ExecutionTrace],
    realization: Dict[str, Union[Profile, np.ndarray]],
    penalty_rate: float,
) -> DeviationReport:
    """Price renewable shortfall of a plan or trace against a realization

    A plan on a coarser grid is held piecewise constant on the realization's
    grid; deliverable output is the realization itself.
    A trace is priced on its ``committed`` schedule.

    Raises:
        ValidationError: on a negative penalty rate or a missing technology
    """
    if penalty_rate < 0:
        raise ValidationError("Penalty rate must be nonnegative", field="penalty_rate", value=penalty_rate)
    plan = executed.committed if isinstance(executed, ExecutionTrace) else executed
    missing = [tech for tech in TECHS if tech not in realization]
    if missing:
        raise ValidationError("Realization lacks a technology", field="realization", value=missing)

    first = realization[TECHS[0]]
    grid = first.grid if isinstance(first, Profile) else plan.grid
    committed, deliverable = {}, {}
    for tech in TECHS:
        used = Profile(plan.grid, getattr(plan, f"p_{tech}_used"), Unit.KW)
        committed[tech] = resample(used, grid).values
        actual = realization[tech]
        deliverable[tech] = np.asarray(actual.values if isinstance(actual, Profile) else actual, dtype=float)
    report = DeviationReport(grid, committed, deliverable, penalty_rate)
    logger.debug(f"Deviation cost {report.total_cost:.4f} over {grid.n_steps} steps")
    return report
