"""Charging-station virtual storage by Minkowski summation of sessions

The envelope adds the per-session bounds componentwise.  When presence
windows differ it is an outer approximation of the true Minkowski sum, so an
aggregate schedule may not split over the physical vehicles;
:func:`disaggregate` detects and measures that.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from ..core.exceptions import AggregationError, ValidationError
from ..core.logging_utils import format_steps, get_logger, sanitize_for_logging
from ..milp.model import LinExpr, MilpModel, Sense, lin_sum
from ..milp.solvers import SolverOptions, solve
from ..scenario.timegrid import Profile, TimeGrid, Unit
from .constants import DISAGGREGATION_EPSILON, SCHEDULE_TOLERANCE
from .sessions import EvSession, SessionSchedule, boundary_injections, presence

logger = get_logger(__name__)


@dataclass(frozen=True)
class StationEnvelope:
    """Dispatchable potential of one station

    ``terminal_withdrawal`` is the SOC still connected at the last step,
    which leaves with its vehicles after the horizon.
    """

    station_id: str
    grid: TimeGrid
    p_ch_max: Profile
    p_dis_max: Profile
    s_min: Profile
    s_max: Profile
    delta_s: Profile
    eta_ch: float = 1.0
    eta_dis: float = 1.0
    eta_ref: float = 1.0
    terminal_withdrawal: float = 0.0
    n_sessions: int = 0

    def __post_init__(self) -> None:
        if np.any(self.s_min.values > self.s_max.values + SCHEDULE_TOLERANCE):
            raise ValidationError("SOC floor above ceiling", field="s_min")
        if np.any(self.p_ch_max.values < 0) or np.any(self.p_dis_max.values < 0):
            raise ValidationError("Negative power cap", field="p_ch_max")

    @classmethod
    def empty(cls, station_id: str, grid: TimeGrid) -> "StationEnvelope":
        zero_kw, zero_kwh = Profile.zeros(grid, Unit.KW), Profile.zeros(grid, Unit.KWH)
        return cls(station_id, grid, zero_kw, zero_kw, zero_kwh, zero_kwh, zero_kwh)

    def beta(self) -> Dict[str, Profile]:
        """The five members of the dispatchable potential"""
        return {
            "p_ch_max": self.p_ch_max,
            "p_dis_max": self.p_dis_max,
            "s_min": self.s_min,
            "s_max": self.s_max,
            "delta_s": self.delta_s,
        }

    def __add__(self, other: "StationEnvelope") -> "StationEnvelope":
        if not isinstance(other, StationEnvelope):
            return NotImplemented
        if other.grid != self.grid:
            raise AggregationError("Envelopes on different grids", station_id=self.station_id)
        if other.n_sessions and self.n_sessions and (self.eta_ch, self.eta_dis, self.eta_ref) != (other.eta_ch, other.eta_dis, other.eta_ref):
            raise AggregationError("Envelopes with different efficiencies", station_id=self.station_id)
        base = self if self.n_sessions else other
        return StationEnvelope(
            station_id=self.station_id,
            grid=self.grid,
            p_ch_max=self.p_ch_max + other.p_ch_max,
            p_dis_max=self.p_dis_max + other.p_dis_max,
            s_min=self.s_min + other.s_min,
            s_max=self.s_max + other.s_max,
            delta_s=self.delta_s + other.delta_s,
            eta_ch=base.eta_ch,
            eta_dis=base.eta_dis,
            eta_ref=base.eta_ref,
            terminal_withdrawal=self.terminal_withdrawal + other.terminal_withdrawal,
            n_sessions=self.n_sessions + other.n_sessions,
        )

    def tightened(
        self,
        reduction: Optional[np.ndarray] = None,
        ch_ceiling: Optional[np.ndarray] = None,
        dis_ceiling: Optional[np.ndarray] = None,
    ) -> "StationEnvelope":
        """Copy with ``s_max`` lowered by ``reduction`` (never below ``s_min``)
        and the power caps lowered to the given ceilings (never below 0)
        """
        s_max = self.s_max.values
        if reduction is not None:
            s_max = np.maximum(self.s_min.values, s_max - np.maximum(reduction, 0.0))
        p_ch_max, p_dis_max = self.p_ch_max.values, self.p_dis_max.values
        if ch_ceiling is not None:
            p_ch_max = np.maximum(0.0, np.minimum(p_ch_max, ch_ceiling))
        if dis_ceiling is not None:
            p_dis_max = np.maximum(0.0, np.minimum(p_dis_max, dis_ceiling))
        return StationEnvelope(
            self.station_id, self.grid, self.p_ch_max.with_values(p_ch_max), self.p_dis_max.with_values(p_dis_max),
            self.s_min, self.s_max.with_values(s_max), self.delta_s, self.eta_ch, self.eta_dis,
            self.eta_ref, self.terminal_withdrawal, self.n_sessions,
        )

    def to_rows(self) -> List[Dict[str, Any]]:
        hours = self.grid.hours()
        return [
            {
                "station_id": self.station_id,
                "step": t,
                "hour": float(hours[t]),
                "p_ch_max": float(self.p_ch_max[t]),
                "p_dis_max": float(self.p_dis_max[t]),
                "s_min": float(self.s_min[t]),
                "s_max": float(self.s_max[t]),
                "delta_s": float(self.delta_s[t]),
            }
            for t in range(self.grid.n_steps)
        ]


@dataclass(frozen=True)
class StationSchedule:
    """Aggregate charging, discharging and SOC of one station"""

    p_ch: Profile
    p_dis: Profile
    soc: Profile

    @property
    def grid(self) -> TimeGrid:
        return self.p_ch.grid

    @classmethod
    def from_arrays(cls, grid: TimeGrid, p_ch, p_dis, soc) -> "StationSchedule":
        return cls(Profile(grid, p_ch, Unit.KW), Profile(grid, p_dis, Unit.KW), Profile(grid, soc, Unit.KWH))

    @classmethod
    def zeros(cls, grid: TimeGrid) -> "StationSchedule":
        zero = np.zeros(grid.n_steps)
        return cls.from_arrays(grid, zero, zero, zero)

    @classmethod
    def from_sessions(cls, schedules: Sequence[SessionSchedule], grid: TimeGrid) -> "StationSchedule":
        p_ch = np.zeros(grid.n_steps)
        p_dis = np.zeros(grid.n_steps)
        soc = np.zeros(grid.n_steps)
        for sch in schedules:
            p_ch += sch.p_ch
            p_dis += sch.p_dis
            soc += sch.soc
        return cls.from_arrays(grid, p_ch, p_dis, soc)


@dataclass(frozen=True)
class Violation:
    step: int
    constraint: str
    residual: float


@dataclass
class DisaggregationResult:
    """Per-session split of a station schedule, or the evidence that none exists

    ``gap`` holds, per step, the SOC (kWh) the vehicles could not follow;
    it is all zeros when ``decomposable`` is True.  ``ch_ceiling`` and
    ``dis_ceiling`` hold the aggregate power (kW) the vehicles could deliver
    at steps where the schedule asked for more, ``inf`` elsewhere.
    ``nearest`` is the sum of the closest feasible per-vehicle schedules,
    which always splits.
    """

    decomposable: bool
    schedules: Dict[str, SessionSchedule] = field(default_factory=dict)
    gap: Optional[np.ndarray] = None
    reason: str = ""
    ch_ceiling: Optional[np.ndarray] = None
    dis_ceiling: Optional[np.ndarray] = None
    nearest: Optional[StationSchedule] = None


def aggregate(sessions: Sequence[EvSession], grid: TimeGrid, station_id: Optional[str] = None) -> StationEnvelope:
    """Componentwise sum of session bounds and boundary injections

    Raises:
        AggregationError: if sessions carry different efficiencies
    """
    sid = station_id or (sessions[0].station_id if sessions else "station")
    if not sessions:
        return StationEnvelope.empty(sid, grid)
    effs = {(s.eta_ch, s.eta_dis, s.eta_ref) for s in sessions}
    if len(effs) > 1:
        raise AggregationError("Sessions of one station must share efficiencies", details=sorted(effs), station_id=sid)
    eta_ch, eta_dis, eta_ref = effs.pop()

    n = grid.n_steps
    p_ch = np.zeros(n)
    p_dis = np.zeros(n)
    s_min = np.zeros(n)
    s_max = np.zeros(n)
    delta = np.zeros(n)
    terminal = 0.0
    for s in sessions:
        d = presence(s, grid).d.astype(float)
        p_ch += s.p_ch_max * d
        p_dis += s.p_dis_max * d
        s_min += s.soc_min * d
        s_max += s.soc_max * d
        delta += boundary_injections(s, grid).values
        if s.t_leave == n - 1:
            terminal += s.soc_leave
    return StationEnvelope(
        station_id=sid,
        grid=grid,
        p_ch_max=Profile(grid, p_ch, Unit.KW),
        p_dis_max=Profile(grid, p_dis, Unit.KW),
        s_min=Profile(grid, s_min, Unit.KWH),
        s_max=Profile(grid, s_max, Unit.KWH),
        delta_s=Profile(grid, delta, Unit.KWH),
        eta_ch=eta_ch,
        eta_dis=eta_dis,
        eta_ref=eta_ref,
        terminal_withdrawal=terminal,
        n_sessions=len(sessions),
    )


def soc_recursion_residual(env: StationEnvelope, sch: StationSchedule, soc_start: float = 0.0) -> np.ndarray:
    """Per-step residual of the station SOC recursion"""
    dt = env.grid.dt_hours
    prev = np.concatenate(([soc_start], sch.soc.values[:-1]))
    expected = (
        prev
        + env.delta_s.values
        + env.eta_ch * sch.p_ch.values * dt
        - env.eta_ref * sch.p_dis.values * dt / env.eta_dis
    )
    return sch.soc.values - expected


def validate_schedule(env: StationEnvelope, sch: StationSchedule, tolerance: float = SCHEDULE_TOLERANCE) -> List[Violation]:
    """Check power caps, SOC recursion and SOC corridor; empty list iff feasible"""
    if sch.grid != env.grid:
        raise ValidationError("Schedule and envelope grids differ", field="grid")
    report: List[Violation] = []
    checks = (
        ("p_ch_min", -sch.p_ch.values),
        ("p_ch_max", sch.p_ch.values - env.p_ch_max.values),
        ("p_dis_min", -sch.p_dis.values),
        ("p_dis_max", sch.p_dis.values - env.p_dis_max.values),
        ("soc_recursion", np.abs(soc_recursion_residual(env, sch))),
        ("soc_min", env.s_min.values - sch.soc.values),
        ("soc_max", sch.soc.values - env.s_max.values),
    )
    for name, excess in checks:
        for t in np.flatnonzero(excess > tolerance):
            report.append(Violation(int(t), name, float(excess[t])))
    report.sort(key=lambda v: (v.step, v.constraint))
    return report


def _split_model(env: StationEnvelope, sch: StationSchedule, sessions: Sequence[EvSession], elastic: bool):
    grid = env.grid
    dt = grid.dt_hours
    model = MilpModel(f"disaggregate[{env.station_id}]")
    per_session = {}
    sum_ch = [LinExpr() for _ in range(grid.n_steps)]
    sum_dis = [LinExpr() for _ in range(grid.n_steps)]
    for s in sessions:
        s.check_grid(grid)
        steps = range(s.t_arrive, s.t_leave + 1)
        ch = {t: model.add_var(f"{s.id}_ch[{t}]", 0.0, s.p_ch_max) for t in steps}
        dis = {t: model.add_var(f"{s.id}_dis[{t}]", 0.0, s.p_dis_max) for t in steps}
        soc = {t: model.add_var(f"{s.id}_soc[{t}]", s.soc_min, s.soc_max) for t in steps}
        peak = model.add_var(f"{s.id}_peak", 0.0, s.p_ch_max + s.p_dis_max)
        prev = s.soc_arrive
        for t in steps:
            model.add_constraint(
                soc[t] - prev - s.eta_ch * dt * ch[t] + (s.eta_ref * dt / s.eta_dis) * dis[t],
                Sense.EQ, 0.0, f"{s.id}_soc_balance[{t}]",
            )
            model.add_constraint(ch[t] + dis[t] - peak, Sense.LE, 0.0, f"{s.id}_peak[{t}]")
            sum_ch[t] += ch[t]
            sum_dis[t] += dis[t]
            prev = soc[t]
        model.fix(soc[s.t_leave], s.soc_leave)
        if not elastic:
            model.add_objective(peak)
            model.add_objective(DISAGGREGATION_EPSILON * lin_sum(list(ch.values()) + list(dis.values())))
        per_session[s.id] = (s, ch, dis, soc)

    slacks = []
    for t in range(grid.n_steps):
        rows = ((sum_ch[t], sch.p_ch[t], "ch", env.eta_ch * dt), (sum_dis[t], sch.p_dis[t], "dis", env.eta_ref * dt / env.eta_dis))
        for expr, target, tag, energy_per_kw in rows:
            if elastic:
                up = model.add_var(f"slack_{tag}_up[{t}]")
                dn = model.add_var(f"slack_{tag}_dn[{t}]")
                expr = expr + up - dn
                slacks.append((t, tag, energy_per_kw, up, dn))
            model.add_constraint(expr, Sense.EQ, float(target), f"sum_{tag}[{t}]")
    if elastic:
        model.add_objective(lin_sum(up + dn for *_, up, dn in slacks))
    return model, per_session, slacks


def _session_schedules(per_session, solution, grid: TimeGrid) -> Dict[str, SessionSchedule]:
    schedules = {}
    for sid, (s, ch, dis, soc) in per_session.items():
        p_ch = np.zeros(grid.n_steps)
        p_dis = np.zeros(grid.n_steps)
        soc_path = np.zeros(grid.n_steps)
        for t in ch:
            p_ch[t] = solution[ch[t]]
            p_dis[t] = solution[dis[t]]
            soc_path[t] = solution[soc[t]]
        schedules[sid] = SessionSchedule(p_ch, p_dis, soc_path)
    return schedules


def disaggregate(
    env: StationEnvelope,
    sch: StationSchedule,
    sessions: Sequence[EvSession],
    options: Optional[SolverOptions] = None,
) -> DisaggregationResult:
    """Split ``sch`` over ``sessions`` honoring each vehicle's own limits

    Among feasible splits the one with the smallest sum of per-vehicle peak
    power is returned.  When no split exists an elastic re-solve measures
    the per-step SOC gap.
    """
    grid = env.grid
    model, per_session, _ = _split_model(env, sch, sessions, elastic=False)
    solution = solve(model, options)
    if solution.is_optimal:
        return DisaggregationResult(True, _session_schedules(per_session, solution, grid), np.zeros(grid.n_steps))

    model, per_session, slacks = _split_model(env, sch, sessions, elastic=True)
    elastic = solve(model, options)
    gap = np.zeros(grid.n_steps)
    if not elastic.is_optimal:
        reason = "vehicles cannot meet their own departure targets"
        logger.warning(f"Station {sanitize_for_logging(env.station_id)}: {reason}")
        return DisaggregationResult(False, gap=gap, reason=reason)
    ceiling = {"ch": np.full(grid.n_steps, np.inf), "dis": np.full(grid.n_steps, np.inf)}
    for t, tag, energy_per_kw, up, dn in slacks:
        gap[t] += energy_per_kw * (elastic[up] + elastic[dn])
        if elastic[up] > SCHEDULE_TOLERANCE:
            target = sch.p_ch[t] if tag == "ch" else sch.p_dis[t]
            ceiling[tag][t] = max(0.0, float(target) - elastic[up])
    gap[np.abs(gap) < SCHEDULE_TOLERANCE] = 0.0
    nearest = StationSchedule.from_sessions(list(_session_schedules(per_session, elastic, grid).values()), grid)
    steps = format_steps(np.flatnonzero(gap))
    logger.debug(f"Station {sanitize_for_logging(env.station_id)}: non-decomposable at steps {steps}")
    return DisaggregationResult(
        False,
        gap=gap,
        reason=f"aggregate power not attainable at steps {steps}",
        ch_ceiling=ceiling["ch"],
        dis_ceiling=ceiling["dis"],
        nearest=nearest,
    )
