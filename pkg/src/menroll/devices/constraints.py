"""Device constraint generators

Each ``add_*`` function declares a device's variables over ``steps`` (absolute
step indices of the model's grid) and its physical constraints, and returns
the variable handles.  Both the day-ahead model and the intra-day windows are
assembled from these generators; objective terms are left to the caller.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np

from ..fleet.aggregation import StationEnvelope, StationSchedule
from ..milp.linearize import add_exclusive_pair, add_pwl
from ..milp.model import LinExpr, MilpModel, Sense, Variable
from .models import gt_fuel_pwl
from .params import BatteryParams, GasTurbineParams, GridTieParams, HeatParams

State = Union[Variable, LinExpr, float]


@dataclass
class GridTieVars:
    buy: List[Variable]
    sell: List[Variable]

    def net(self, i: int) -> LinExpr:
        return self.buy[i] - self.sell[i]


@dataclass
class GasTurbineVars:
    p: List[Variable]
    on: List[Union[Variable, float]]
    start_up: List[Variable] = field(default_factory=list)
    shut_down: List[Variable] = field(default_factory=list)
    fuel: List[Variable] = field(default_factory=list)


@dataclass
class BatteryVars:
    ch: List[Variable]
    dis: List[Variable]
    energy: List[Variable]


@dataclass
class StationVars:
    envelope: StationEnvelope
    ch: List[Variable]
    dis: List[Variable]
    soc: List[Variable]


@dataclass
class HeatVars:
    q_hp: List[Variable]
    p_hp: List[Variable]
    hs_ch: List[Variable]
    hs_dis: List[Variable]
    hs_energy: List[Variable]


def add_grid_tie(model: MilpModel, params: GridTieParams, steps: Sequence[int], prefix: str = "grid") -> GridTieVars:
    """Buy/sell split of the tie-line exchange with mutual exclusion"""
    buy, sell = [], []
    for t in steps:
        b = model.add_var(f"{prefix}_buy[{t}]", 0.0, params.buy_cap)
        s = model.add_var(f"{prefix}_sell[{t}]", 0.0, params.sell_cap)
        if params.buy_cap > 0 and params.sell_cap > 0:
            add_exclusive_pair(model, b, s, name=f"{prefix}_mode[{t}]")
        if params.p_min > 0:
            model.add_constraint(b - s, Sense.GE, params.p_min, f"{prefix}_net_min[{t}]")
        if params.p_max < 0:
            model.add_constraint(b - s, Sense.LE, params.p_max, f"{prefix}_net_max[{t}]")
        buy.append(b)
        sell.append(s)
    return GridTieVars(buy, sell)


def add_gas_turbine(
    model: MilpModel,
    g: GasTurbineParams,
    steps: Sequence[int],
    commitment: Optional[Sequence[float]] = None,
    p_prev: Optional[float] = None,
    on_prev: Optional[bool] = None,
    prefix: str = "gt",
) -> GasTurbineVars:
    """Output, ramps and (without ``commitment``) unit commitment with fuel cost

    With ``commitment`` given the on/off pattern is data and no fuel curve is
    built; otherwise ``on`` is binary, start-up/shut-down indicators follow
    ``on_t - on_{t-1} = su_t - sd_t`` and fuel is the piecewise-linear curve
    gated by ``on``.
    """
    p_prev = g.initial_p if p_prev is None else p_prev
    on_prev = g.initial_on if on_prev is None else on_prev
    curve = gt_fuel_pwl(g) if commitment is None else None
    out = GasTurbineVars(p=[], on=[])
    prev_p: State = float(p_prev)
    prev_on: State = 1.0 if on_prev else 0.0
    for i, t in enumerate(steps):
        if commitment is not None:
            on_t = 1.0 if commitment[i] > 0.5 else 0.0
            p = model.add_var(f"{prefix}_p[{t}]", g.p_min * on_t, g.p_max * on_t)
            out.on.append(on_t)
        else:
            p = model.add_var(f"{prefix}_p[{t}]", 0.0, g.p_max)
            on = model.add_var(f"{prefix}_on[{t}]", binary=True)
            su = model.add_var(f"{prefix}_su[{t}]", 0.0, 1.0)
            sd = model.add_var(f"{prefix}_sd[{t}]", 0.0, 1.0)
            model.add_constraint(p - g.p_max * on, Sense.LE, 0.0, f"{prefix}_pmax[{t}]")
            model.add_constraint(p - g.p_min * on, Sense.GE, 0.0, f"{prefix}_pmin[{t}]")
            model.add_constraint(on - prev_on - su + sd, Sense.EQ, 0.0, f"{prefix}_switch[{t}]")
            model.add_constraint(su + sd, Sense.LE, 1.0, f"{prefix}_switch_once[{t}]")
            out.fuel.append(add_pwl(model, p, curve.breakpoints, active=on, name=f"{prefix}_fuel[{t}]"))
            out.on.append(on)
            out.start_up.append(su)
            out.shut_down.append(sd)
            prev_on = on
        if np.isfinite(g.ramp_up):
            model.add_constraint(p - prev_p, Sense.LE, g.ramp_up, f"{prefix}_ramp_up[{t}]")
        if np.isfinite(g.ramp_down):
            model.add_constraint(prev_p - p, Sense.LE, g.ramp_down, f"{prefix}_ramp_down[{t}]")
        out.p.append(p)
        prev_p = p
    return out


def add_battery(
    model: MilpModel,
    b: BatteryParams,
    steps: Sequence[int],
    dt: float,
    e_start: Optional[float] = None,
    terminal: Optional[float] = None,
    prefix: str = "ess",
) -> BatteryVars:
    """Energy recursion ``E_t = E_{t-1} + eta_ch ch dt - dis dt / eta_dis`` within the SOC corridor"""
    lo, hi = b.energy_bounds
    prev: State = b.energy_start if e_start is None else float(e_start)
    out = BatteryVars([], [], [])
    for t in steps:
        ch = model.add_var(f"{prefix}_ch[{t}]", 0.0, b.p_rated)
        dis = model.add_var(f"{prefix}_dis[{t}]", 0.0, b.p_rated)
        energy = model.add_var(f"{prefix}_energy[{t}]", lo, hi)
        model.add_constraint(
            energy - prev - (b.eta_ch * dt) * ch + (dt / b.eta_dis) * dis,
            Sense.EQ, 0.0, f"{prefix}_balance[{t}]",
        )
        if b.p_rated > 0:
            add_exclusive_pair(model, ch, dis, name=f"{prefix}_mode[{t}]")
        out.ch.append(ch)
        out.dis.append(dis)
        out.energy.append(energy)
        prev = energy
    if terminal is not None and out.energy:
        model.fix(out.energy[-1], terminal)
    return out


def add_station(
    model: MilpModel,
    env: StationEnvelope,
    steps: Sequence[int],
    s_prev: float = 0.0,
    terminal: Optional[float] = None,
    prefix: Optional[str] = None,
    fixed: Optional[StationSchedule] = None,
) -> StationVars:
    """Virtual storage of one charging station

    Besides the envelope corridor on the end-of-step SOC, the SOC right after
    the boundary injections (``S_{t-1} + dS_t``) must lie in the corridor too,
    so a coarse schedule stays feasible when spread over a finer grid.

    With ``fixed`` the charge and discharge power follow that schedule
    (clipped to the caps); different vehicles may charge and discharge in
    the same step, so no mode binary is added.
    """
    prefix = prefix or f"st_{env.station_id}"
    dt = env.grid.dt_hours
    k_ch = env.eta_ch * dt
    k_dis = env.eta_ref * dt / env.eta_dis
    prev: State = float(s_prev)
    out = StationVars(env, [], [], [])
    for t in steps:
        cap_ch, cap_dis = float(env.p_ch_max[t]), float(env.p_dis_max[t])
        ch = model.add_var(f"{prefix}_ch[{t}]", 0.0, cap_ch)
        dis = model.add_var(f"{prefix}_dis[{t}]", 0.0, cap_dis)
        soc = model.add_var(f"{prefix}_soc[{t}]", float(env.s_min[t]), float(env.s_max[t]))
        entry = prev + float(env.delta_s[t])
        model.add_constraint(soc - entry - k_ch * ch + k_dis * dis, Sense.EQ, 0.0, f"{prefix}_balance[{t}]")
        if not isinstance(prev, float):
            model.add_constraint(entry, Sense.GE, float(env.s_min[t]), f"{prefix}_entry_min[{t}]")
            model.add_constraint(entry, Sense.LE, float(env.s_max[t]), f"{prefix}_entry_max[{t}]")
        if fixed is not None:
            model.fix(ch, min(max(float(fixed.p_ch[t]), 0.0), cap_ch))
            model.fix(dis, min(max(float(fixed.p_dis[t]), 0.0), cap_dis))
        elif cap_ch > 0 and cap_dis > 0:
            add_exclusive_pair(model, ch, dis, name=f"{prefix}_mode[{t}]")
        out.ch.append(ch)
        out.dis.append(dis)
        out.soc.append(soc)
        prev = soc
    if terminal is not None and out.soc:
        model.fix(out.soc[-1], terminal)
    return out


def add_heat(
    model: MilpModel,
    h: HeatParams,
    steps: Sequence[int],
    dt: float,
    e_start: Optional[float] = None,
    terminal: Optional[float] = None,
    prefix: str = "heat",
) -> HeatVars:
    """Heat pump (``P_hp = Q_hp / COP``) and heat storage with exclusive modes"""
    prev: State = h.hs_energy_start if e_start is None else float(e_start)
    two_mode = h.hs_ch_min > 0 or h.hs_dis_min > 0
    out = HeatVars([], [], [], [], [])
    for t in steps:
        q = model.add_var(f"{prefix}_q_hp[{t}]", 0.0, h.hp_q_max)
        p = model.add_var(f"{prefix}_p_hp[{t}]", 0.0, h.hp_q_max / h.hp_cop)
        model.add_constraint(h.hp_cop * p - q, Sense.EQ, 0.0, f"{prefix}_cop[{t}]")
        ch = model.add_var(f"{prefix}_hs_ch[{t}]", 0.0, h.hs_ch_max)
        dis = model.add_var(f"{prefix}_hs_dis[{t}]", 0.0, h.hs_dis_max)
        energy = model.add_var(f"{prefix}_hs_energy[{t}]", 0.0, h.hs_capacity)
        model.add_constraint(energy - prev - dt * ch + dt * dis, Sense.EQ, 0.0, f"{prefix}_hs_balance[{t}]")
        if two_mode:
            b_ch = model.add_var(f"{prefix}_hs_ch_on[{t}]", binary=True)
            b_dis = model.add_var(f"{prefix}_hs_dis_on[{t}]", binary=True)
            model.add_constraint(ch - h.hs_ch_max * b_ch, Sense.LE, 0.0, f"{prefix}_hs_ch_max[{t}]")
            model.add_constraint(ch - h.hs_ch_min * b_ch, Sense.GE, 0.0, f"{prefix}_hs_ch_min[{t}]")
            model.add_constraint(dis - h.hs_dis_max * b_dis, Sense.LE, 0.0, f"{prefix}_hs_dis_max[{t}]")
            model.add_constraint(dis - h.hs_dis_min * b_dis, Sense.GE, 0.0, f"{prefix}_hs_dis_min[{t}]")
            model.add_constraint(b_ch + b_dis, Sense.LE, 1.0, f"{prefix}_hs_mode[{t}]")
        elif h.hs_ch_max > 0 and h.hs_dis_max > 0:
            add_exclusive_pair(model, ch, dis, name=f"{prefix}_hs_mode[{t}]")
        out.q_hp.append(q)
        out.p_hp.append(p)
        out.hs_ch.append(ch)
        out.hs_dis.append(dis)
        out.hs_energy.append(energy)
        prev = energy
    if terminal is not None and out.hs_energy:
        model.fix(out.hs_energy[-1], terminal)
    return out


def add_renewable(model: MilpModel, available: Sequence[float], steps: Sequence[int], prefix: str) -> List[Variable]:
    """Used output in ``[0, available]``; the remainder is curtailed"""
    return [model.add_var(f"{prefix}_used[{t}]", 0.0, max(float(a), 0.0)) for a, t in zip(available, steps)]
