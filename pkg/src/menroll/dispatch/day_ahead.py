"""Chance-constrained day-ahead dispatch

The model minimizes fuel, start-up/shut-down, pollution, tie-line, battery
throughput, station throughput, demand response and curtailment costs over
the day-ahead grid.  Renewable forecast error enters as a reserve: the
scheduled renewable output must leave ``q(eta) * sigma_total`` of forecast
headroom at every step, so the balance holds with probability ``eta``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..core.exceptions import AlignmentError, InfeasibleError, ModelingError, SolverError, SolverLimitError
from ..core.logging_utils import format_steps, get_logger, sanitize_for_logging
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
from ..devices.demand_response import DrDecision, DrVars, add_demand_response
from ..fleet.aggregation import DisaggregationResult, StationEnvelope, StationSchedule, disaggregate
from ..milp.linearize import add_abs
from ..milp.model import LinExpr, MilpModel, Sense, Solution, SolveStatus, Variable, lin_sum
from ..milp.solvers import SolverOptions, check_solution, solve
from ..scenario.forecast import std_normal_quantile
from ..scenario.scenario_config import ScenarioConfig
from ..scenario.timegrid import Profile, Unit
from .constants import COST_CHECK_TOLERANCE, DIAGNOSIS_TOLERANCE, ELASTIC_PENALTY, MAX_REPAIR_ITERATIONS
from .plan import DispatchPlan, compute_costs, peak_valley_metric

logger = get_logger(__name__)

__all__ = [
    "DayAheadModel",
    "RepairResult",
    "build_day_ahead",
    "solve_day_ahead",
    "solve_with_repair",
    "peak_valley_metric",
    "reserve_requirement",
]


@dataclass
class DayAheadModel:
    """A built day-ahead MILP plus the handles needed to decode it"""

    cfg: ScenarioConfig
    model: MilpModel
    envelopes: List[StationEnvelope]
    dr_enabled: bool
    tie: GridTieVars
    pv: List[Variable]
    wt: List[Variable]
    pv_avail: np.ndarray
    wt_avail: np.ndarray
    reserve: np.ndarray
    gt: Optional[GasTurbineVars] = None
    ess: Optional[BatteryVars] = None
    heat: Optional[HeatVars] = None
    stations: List[StationVars] = field(default_factory=list)
    dr: Optional[DrVars] = None
    electric_slack: List[Tuple[Variable, Variable]] = field(default_factory=list)
    thermal_slack: List[Tuple[Variable, Variable]] = field(default_factory=list)
    fixed_stations: Dict[str, StationSchedule] = field(default_factory=dict)


def reserve_requirement(cfg: ScenarioConfig) -> np.ndarray:
    """``q(eta) * sqrt(sigma_pv^2 + sigma_wt^2)`` per day-ahead step"""
    return std_normal_quantile(cfg.eta_confidence) * cfg.sigma_total().values


def build_day_ahead(
    cfg: ScenarioConfig,
    envelopes: Sequence[StationEnvelope],
    dr_enabled: bool = True,
    elastic: bool = False,
    fixed_stations: Optional[Mapping[str, StationSchedule]] = None,
) -> DayAheadModel:
    """Assemble the day-ahead model

    With ``elastic`` the electric and thermal balances get penalized slack
    in both directions; that variant exists only for infeasibility diagnosis.
    Stations named in ``fixed_stations`` follow the given power schedule.

    Raises:
        AlignmentError: if an envelope is not on the day-ahead grid
        ModelingError: if there is heat load but no heat system
    """
    grid = cfg.day_ahead_grid
    for env in envelopes:
        if env.grid != grid:
            raise AlignmentError(
                f"Envelope of station {env.station_id} is not on the day-ahead grid",
                source_steps=env.grid.n_steps,
                target_steps=grid.n_steps,
            )
    dev = cfg.devices
    if dev.heat is None and np.any(cfg.load_h.values > 0):
        raise ModelingError("Heat load present but no heat system configured", variable="load_h")

    n, dt = grid.n_steps, grid.dt_hours
    steps = range(n)
    model = MilpModel(f"day-ahead[{cfg.name}]{'-elastic' if elastic else ''}")

    tie = add_grid_tie(model, dev.grid_tie, steps)
    gt = add_gas_turbine(model, dev.gas_turbine, steps) if dev.gas_turbine else None
    ess = add_battery(model, dev.battery, steps, dt, terminal=dev.battery.energy_start) if dev.battery else None
    fixed_stations = dict(fixed_stations or {})
    stations = [
        add_station(model, env, steps, terminal=env.terminal_withdrawal, fixed=fixed_stations.get(env.station_id))
        for env in envelopes
    ]
    heat = add_heat(model, dev.heat, steps, dt, terminal=dev.heat.hs_energy_start) if dev.heat else None

    pv_avail = cfg.renewable_forecast("pv").forecast.values.copy()
    wt_avail = cfg.renewable_forecast("wt").forecast.values.copy()
    pv = add_renewable(model, pv_avail, steps, "pv")
    wt = add_renewable(model, wt_avail, steps, "wt")
    dr = add_demand_response(model, cfg.dr, cfg.load_e, cfg.load_h, enabled=dr_enabled)

    reserve = reserve_requirement(cfg)
    headroom = pv_avail + wt_avail - reserve
    if np.any(headroom < 0):
        short = format_steps(np.flatnonzero(headroom < 0))
        logger.warning(f"Reserve exceeds forecast renewable output at steps {short}; capping it at the forecast")
    reserve = np.minimum(reserve, pv_avail + wt_avail)

    dam = DayAheadModel(cfg, model, list(envelopes), dr_enabled, tie, pv, wt, pv_avail, wt_avail,
                        reserve, gt, ess, heat, stations, dr, fixed_stations=fixed_stations)

    for t in steps:
        if reserve[t] > 0:
            model.add_constraint(pv[t] + wt[t], Sense.LE, float(pv_avail[t] + wt_avail[t] - reserve[t]), f"reserve[{t}]")

        balance = tie.net(t) + pv[t] + wt[t]
        if gt:
            balance += gt.p[t]
        if ess:
            balance += ess.dis[t] - ess.ch[t]
        for st in stations:
            balance += st.dis[t] - st.ch[t]
        if heat:
            balance -= heat.p_hp[t]
        if dr:
            balance += dr.shift_out[t] + dr.curtail_e[t] - dr.shift_in[t]
        if elastic:
            short = model.add_var(f"e_short[{t}]")
            surplus = model.add_var(f"e_surplus[{t}]")
            balance += short - surplus
            dam.electric_slack.append((short, surplus))
        model.add_constraint(balance, Sense.EQ, float(cfg.load_e[t]), f"electric_balance[{t}]")

        if heat:
            thermal = heat.q_hp[t] + heat.hs_dis[t] - heat.hs_ch[t]
            if dr:
                thermal += dr.curtail_h[t]
            if elastic:
                short = model.add_var(f"h_short[{t}]")
                surplus = model.add_var(f"h_surplus[{t}]")
                thermal += short - surplus
                dam.thermal_slack.append((short, surplus))
            model.add_constraint(thermal, Sense.EQ, float(cfg.load_h[t]), f"thermal_balance[{t}]")

    if elastic:
        slacks = [v for pair in dam.electric_slack + dam.thermal_slack for v in pair]
        model.add_objective(ELASTIC_PENALTY * lin_sum(slacks))
    _add_objective(dam)

    logger.info(
        f"Built {model.name}: {model.n_vars} vars, {model.n_binaries} binaries, "
        f"{model.n_constraints} rows, reserve up to {reserve.max(initial=0.0):.2f} kW"
    )
    return dam


def _add_objective(dam: DayAheadModel) -> None:
    cfg, model = dam.cfg, dam.model
    grid = cfg.day_ahead_grid
    dt = grid.dt_hours
    dev = cfg.devices
    tie = dev.grid_tie
    obj = LinExpr(model_id=model.model_id)

    if dam.gt:
        g = dev.gas_turbine
        for t in range(grid.n_steps):
            obj += dt * dam.gt.fuel[t] + g.cost_up * dam.gt.start_up[t] + g.cost_down * dam.gt.shut_down[t]
            obj += (g.k_pollution * dt) * dam.gt.p[t]

    for t in range(grid.n_steps):
        obj += ((tie.price_buy[t] + tie.sigma_gird) * dt) * dam.tie.buy[t]
        obj += ((tie.sigma_gird - tie.price_sell[t]) * dt) * dam.tie.sell[t]

    if dam.ess and dev.battery.k_loss > 0:
        for t in range(grid.n_steps):
            a = add_abs(model, dam.ess.dis[t] - dam.ess.ch[t], name=f"ess_abs[{t}]")
            obj += (dev.battery.k_loss * dt) * a

    if cfg.prices.c_evc > 0:
        for st in dam.stations:
            obj += (cfg.prices.c_evc * dt) * (lin_sum(st.ch) + lin_sum(st.dis))

    if dam.dr:
        obj += (cfg.dr.lambda_e * dt) * lin_sum(dam.dr.curtail_e)
        obj += (cfg.dr.lambda_h * dt) * lin_sum(dam.dr.curtail_h)

    # curtailment = available - used
    lam = cfg.prices.lambda_cur * dt
    obj += lam * float(np.sum(dam.pv_avail) + np.sum(dam.wt_avail))
    obj += -lam * (lin_sum(dam.pv) + lin_sum(dam.wt))

    weight = cfg.prices.flatness_weight
    if weight > 0:
        lo, hi = -tie.sell_cap, tie.buy_cap
        g_max = model.add_var("exchange_max", lo, hi)
        g_min = model.add_var("exchange_min", lo, hi)
        for t in range(grid.n_steps):
            model.add_constraint(g_max - dam.tie.net(t), Sense.GE, 0.0, f"exchange_max[{t}]")
            model.add_constraint(g_min - dam.tie.net(t), Sense.LE, 0.0, f"exchange_min[{t}]")
        obj += weight * (g_max - g_min)

    model.add_objective(obj)


def _decode(dam: DayAheadModel, solution: Solution) -> DispatchPlan:
    cfg = dam.cfg
    grid = cfg.day_ahead_grid
    n = grid.n_steps
    zero = np.zeros(n)

    def arr(items) -> np.ndarray:
        return np.maximum(solution.array(items), 0.0) if items else zero.copy()

    plan = DispatchPlan.idle(grid)
    plan.p_buy = arr(dam.tie.buy)
    plan.p_sell = arr(dam.tie.sell)
    plan.p_pv_used = arr(dam.pv)
    plan.p_wt_used = arr(dam.wt)
    plan.p_pv_avail = dam.pv_avail.copy()
    plan.p_wt_avail = dam.wt_avail.copy()
    plan.reserve = dam.reserve.copy()
    if dam.gt:
        plan.p_gt = arr(dam.gt.p)
        plan.gt_on = np.round(solution.array(dam.gt.on))
    if dam.ess:
        plan.p_ess_ch = arr(dam.ess.ch)
        plan.p_ess_dis = arr(dam.ess.dis)
        plan.ess_soc = solution.array(dam.ess.energy)
    if dam.heat:
        plan.q_hp = arr(dam.heat.q_hp)
        plan.p_hp = arr(dam.heat.p_hp)
        plan.h_hs_ch = arr(dam.heat.hs_ch)
        plan.h_hs_dis = arr(dam.heat.hs_dis)
        plan.hs_soc = solution.array(dam.heat.hs_energy)
    for st in dam.stations:
        plan.stations[st.envelope.station_id] = StationSchedule.from_arrays(
            grid, arr(st.ch), arr(st.dis), solution.array(st.soc)
        )
    if dam.dr:
        plan.dr = DrDecision(
            shift_in=Profile(grid, arr(dam.dr.shift_in), Unit.KW),
            shift_out=Profile(grid, arr(dam.dr.shift_out), Unit.KW),
            curtail_e=Profile(grid, arr(dam.dr.curtail_e), Unit.KW),
            curtail_h=Profile(grid, arr(dam.dr.curtail_h), Unit.KW),
        )
    d = plan.dr
    plan.load_e = cfg.load_e.values - d.shift_out.values + d.shift_in.values - d.curtail_e.values
    plan.load_h = cfg.load_h.values - d.curtail_h.values
    return plan


def _diagnose(dam: DayAheadModel, options: Optional[SolverOptions]) -> InfeasibleError:
    elastic = build_day_ahead(dam.cfg, dam.envelopes, dam.dr_enabled, elastic=True, fixed_stations=dam.fixed_stations)
    solution = solve(elastic.model, options)
    if not solution.is_optimal:
        return InfeasibleError(
            "Day-ahead model is infeasible even with relaxed balances",
            details="check storage targets, station envelopes and ramp limits",
        )
    for balance, pairs in (("electric", elastic.electric_slack), ("thermal", elastic.thermal_slack)):
        for t, (short, surplus) in enumerate(pairs):
            s, u = solution[short], solution[surplus]
            if s > DIAGNOSIS_TOLERANCE or u > DIAGNOSIS_TOLERANCE:
                kind = f"shortfall {s:.3f} kW" if s > u else f"surplus {u:.3f} kW"
                return InfeasibleError(
                    f"Day-ahead {balance} balance cannot be met",
                    details=kind,
                    step=t,
                    balance=balance,
                )
    return InfeasibleError("Day-ahead model is infeasible", details="no balance violation found under relaxation")


def solve_day_ahead(dam: DayAheadModel, options: Optional[SolverOptions] = None) -> DispatchPlan:
    """Solve and decode; costs are recomputed from the setpoints

    Raises:
        InfeasibleError: with the first balance step the relaxed model violates
        SolverError: on unbounded models or residual check failure
    """
    try:
        solution = solve(dam.model, options)
    except SolverLimitError as exc:
        if exc.incumbent is None:
            raise
        logger.warning(f"{dam.model.name}: solver limit reached, using incumbent {exc.incumbent.objective:.4f}")
        solution = exc.incumbent
    if solution.status is SolveStatus.INFEASIBLE:
        error = _diagnose(dam, options)
        logger.error(f"{dam.model.name}: {error}")
        raise error
    if not solution.is_optimal:
        raise SolverError(f"{dam.model.name} is {solution.status.value}", status=solution.status.value)
    check_solution(dam.model, solution)

    plan = _decode(dam, solution)
    plan.costs = compute_costs(plan, dam.cfg, dam.dr_enabled)
    plan.objective = solution.objective
    mismatch = abs(plan.costs.total - solution.objective)
    if mismatch > COST_CHECK_TOLERANCE * max(1.0, abs(solution.objective)):
        logger.warning(
            f"{dam.model.name}: recomputed cost {plan.costs.total:.6f} differs from objective "
            f"{solution.objective:.6f}"
        )
    logger.info(f"{dam.model.name}: optimal cost {plan.costs.total:.4f}")
    return plan


@dataclass
class RepairResult:
    """Plan after repair; ``pinned`` names stations held to a split schedule"""

    plan: DispatchPlan
    envelopes: List[StationEnvelope]
    decomposition: Dict[str, DisaggregationResult]
    iterations: int
    pinned: List[str] = field(default_factory=list)

    @property
    def decomposable_rate(self) -> float:
        if not self.decomposition:
            return 1.0
        ok = sum(1 for r in self.decomposition.values() if r.decomposable)
        return ok / len(self.decomposition)


def _split_all(envelopes, plan, sessions, options) -> Dict[str, DisaggregationResult]:
    return {
        env.station_id: disaggregate(env, plan.stations[env.station_id], sessions[env.station_id], options)
        for env in envelopes
    }


def solve_with_repair(
    cfg: ScenarioConfig,
    dr_enabled: bool = True,
    options: Optional[SolverOptions] = None,
    max_iterations: int = MAX_REPAIR_ITERATIONS,
) -> RepairResult:
    """Solve, split every station schedule over its vehicles, tighten and re-solve

    A station whose aggregate schedule cannot be split gets ``s_max`` lowered
    by the measured gap and its power caps lowered to what the vehicles can
    deliver; at most ``max_iterations`` re-solves are made.  Stations still
    unsplittable after that are pinned: every station is held to a schedule
    that splits (its own, or the closest per-vehicle feasible one) and the
    rest of the plan is re-solved around them.
    """
    sessions = cfg.sessions()
    original = cfg.envelopes()
    envelopes = list(original)
    plan = solve_day_ahead(build_day_ahead(cfg, envelopes, dr_enabled), options)
    results = _split_all(envelopes, plan, sessions, options)
    iterations = 0
    while iterations < max_iterations:
        failed = [sid for sid, r in results.items() if not r.decomposable]
        if not failed:
            break
        tightened = []
        for env in envelopes:
            r = results[env.station_id]
            tightened.append(env.tightened(r.gap, r.ch_ceiling, r.dis_ceiling) if not r.decomposable else env)
        try:
            candidate = solve_day_ahead(build_day_ahead(cfg, tightened, dr_enabled), options)
        except InfeasibleError as exc:
            logger.warning(f"Tightened envelopes made the day-ahead model infeasible ({exc})")
            break
        iterations += 1
        envelopes, plan = tightened, candidate
        results = _split_all(envelopes, plan, sessions, options)

    pinned: List[str] = []
    failed = [sid for sid, r in results.items() if not r.decomposable]
    if failed and all(results[sid].nearest is not None for sid in failed):
        fixed = {
            sid: (r.nearest if not r.decomposable else plan.stations[sid])
            for sid, r in results.items()
        }
        try:
            candidate = solve_day_ahead(build_day_ahead(cfg, original, dr_enabled, fixed_stations=fixed), options)
        except InfeasibleError as exc:
            logger.warning(f"Pinning split station schedules made the day-ahead model infeasible ({exc}); keeping the last plan")
        else:
            envelopes, plan = list(original), candidate
            results = _split_all(envelopes, plan, sessions, options)
            pinned = sorted(fixed)

    outcome = RepairResult(plan, envelopes, results, iterations, pinned)
    failed = sorted(sid for sid, r in results.items() if not r.decomposable)
    if failed:
        logger.warning(
            f"Station schedules not decomposable after {iterations} repairs: "
            f"{', '.join(sanitize_for_logging(s) for s in failed)}"
        )
    pin_note = f", {len(pinned)} stations pinned" if pinned else ""
    logger.info(f"Decomposable station schedules: {outcome.decomposable_rate:.0%} after {iterations} repairs{pin_note}")
    return outcome
