"""Single-vehicle grid-connection sessions

A session is present on the steps ``t_arrive..t_leave`` (inclusive).  Its
state of charge at the end of step ``t`` includes the power applied during
``t``; the arrival SOC is injected at ``t_arrive`` and the departure SOC is
withdrawn on the step after ``t_leave``.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Any, Dict, Iterable, List, Optional

import numpy as np

from ..core.exceptions import ValidationError
from ..scenario.timegrid import Profile, TimeGrid, Unit

# Tolerance on power bounds and terminal SOC checks
TOLERANCE = 1e-6


@dataclass(frozen=True)
class EvSession:
    """One vehicle's connection to a station"""

    id: str
    station_id: str
    t_arrive: int
    t_leave: int
    soc_arrive: float
    soc_leave: float
    soc_min: float
    soc_max: float
    p_ch_max: float
    p_dis_max: float
    eta_ch: float = 0.95
    eta_dis: float = 0.95
    eta_ref: float = 1.0

    def __post_init__(self) -> None:
        if self.t_arrive < 0 or self.t_arrive > self.t_leave:
            raise ValidationError("Session must arrive before it leaves", field="t_arrive", value=self.t_arrive)
        if not self.soc_min <= self.soc_arrive <= self.soc_max:
            raise ValidationError("Arrival SOC outside the session corridor", field="soc_arrive", value=self.soc_arrive)
        if not self.soc_min <= self.soc_leave <= self.soc_max:
            raise ValidationError("Departure SOC outside the session corridor", field="soc_leave", value=self.soc_leave)
        if self.soc_min < 0:
            raise ValidationError("SOC floor must be nonnegative", field="soc_min", value=self.soc_min)
        if self.p_ch_max < 0 or self.p_dis_max < 0:
            raise ValidationError("Power limits must be nonnegative", field="p_ch_max")
        for name in ("eta_ch", "eta_dis"):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise ValidationError("Efficiency must lie in (0, 1]", field=name, value=value)
        if self.eta_ref <= 0:
            raise ValidationError("Discharge compensation must be positive", field="eta_ref", value=self.eta_ref)

    @property
    def n_present(self) -> int:
        return self.t_leave - self.t_arrive + 1

    def check_grid(self, grid: TimeGrid) -> None:
        if self.t_leave >= grid.n_steps:
            raise ValidationError(
                f"Session {self.id} leaves at step {self.t_leave} on a {grid.n_steps}-step grid",
                field="t_leave",
                value=self.t_leave,
            )

    def charge_gain(self, dt: float) -> float:
        """SOC added by one step at full charging power"""
        return self.eta_ch * self.p_ch_max * dt

    def discharge_loss(self, dt: float) -> float:
        """SOC removed by one step at full discharging power"""
        return self.eta_ref * self.p_dis_max * dt / self.eta_dis

    def rescaled(self, source: TimeGrid, target: TimeGrid) -> "EvSession":
        """The same session expressed on the finer grid ``target``"""
        k = source.ratio_to(target)
        return EvSession(
            id=self.id,
            station_id=self.station_id,
            t_arrive=self.t_arrive * k,
            t_leave=(self.t_leave + 1) * k - 1,
            soc_arrive=self.soc_arrive,
            soc_leave=self.soc_leave,
            soc_min=self.soc_min,
            soc_max=self.soc_max,
            p_ch_max=self.p_ch_max,
            p_dis_max=self.p_dis_max,
            eta_ch=self.eta_ch,
            eta_dis=self.eta_dis,
            eta_ref=self.eta_ref,
        )

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EvSession":
        return cls(**data)


@dataclass(frozen=True)
class PresenceSeries:
    """Per-step grid-connection indicator of one session"""

    d: np.ndarray

    def as_int(self) -> np.ndarray:
        return self.d.astype(int)

    def arrival_marker(self) -> np.ndarray:
        """``D_t (D_t - D_{t-1})``, one exactly at the arrival step"""
        d = self.as_int()
        prev = np.concatenate(([0], d[:-1]))
        return d * (d - prev)

    def departure_marker(self) -> np.ndarray:
        """``D_{t-1} (D_{t-1} - D_t)``, one exactly on the step after departure"""
        d = self.as_int()
        prev = np.concatenate(([0], d[:-1]))
        return prev * (prev - d)


@dataclass(frozen=True)
class SessionSchedule:
    """Per-step charging, discharging and SOC of one session (zero when absent)"""

    p_ch: np.ndarray
    p_dis: np.ndarray
    soc: np.ndarray


def presence(s: EvSession, grid: TimeGrid) -> PresenceSeries:
    s.check_grid(grid)
    d = np.zeros(grid.n_steps, dtype=bool)
    d[s.t_arrive:s.t_leave + 1] = True
    return PresenceSeries(d)


def soc_step(s: EvSession, soc_prev: float, p_ch: float, p_dis: float, dt: float) -> float:
    """SOC after one step of charging ``p_ch`` and discharging ``p_dis``"""
    if p_ch < -TOLERANCE or p_ch > s.p_ch_max + TOLERANCE:
        raise ValidationError("Charging power outside its limits", field="p_ch", value=p_ch)
    if p_dis < -TOLERANCE or p_dis > s.p_dis_max + TOLERANCE:
        raise ValidationError("Discharging power outside its limits", field="p_dis", value=p_dis)
    return soc_prev + s.eta_ch * p_ch * dt - s.eta_ref * p_dis * dt / s.eta_dis


def boundary_injections(s: EvSession, grid: TimeGrid) -> Profile:
    """Arrival SOC in at ``t_arrive``, departure SOC out on the step after ``t_leave``"""
    d = presence(s, grid)
    values = s.soc_arrive * d.arrival_marker() - s.soc_leave * d.departure_marker()
    return Profile(grid, values.astype(float), Unit.KWH)


def max_reachable_soc(s: EvSession, dt: float) -> float:
    return min(s.soc_max, s.soc_arrive + s.charge_gain(dt) * s.n_present)


def greedy_schedule(s: EvSession, grid: TimeGrid) -> Optional[SessionSchedule]:
    """Move SOC toward ``soc_leave`` at the highest admissible rate

    Returns None when the departure SOC cannot be met.
    """
    s.check_grid(grid)
    dt = grid.dt_hours
    p_ch = np.zeros(grid.n_steps)
    p_dis = np.zeros(grid.n_steps)
    soc_path = np.zeros(grid.n_steps)
    soc = s.soc_arrive
    for t in range(s.t_arrive, s.t_leave + 1):
        need = s.soc_leave - soc
        if need > 0:
            p_ch[t] = min(s.p_ch_max, need / (s.eta_ch * dt))
        elif need < 0:
            p_dis[t] = min(s.p_dis_max, -need * s.eta_dis / (s.eta_ref * dt))
        soc = soc_step(s, soc, p_ch[t], p_dis[t], dt)
        soc_path[t] = soc
    if abs(soc - s.soc_leave) > TOLERANCE:
        return None
    return SessionSchedule(p_ch, p_dis, soc_path)


def is_reachable(s: EvSession, grid: TimeGrid) -> bool:
    return greedy_schedule(s, grid) is not None


def random_feasible_schedule(s: EvSession, grid: TimeGrid, rng: np.random.Generator) -> SessionSchedule:
    """Sample a schedule that stays in the corridor and departs at ``soc_leave``

    Each step draws the next SOC uniformly from the band that keeps the
    departure target reachable.

    Raises:
        ValidationError: if the departure SOC is unreachable
    """
    if not is_reachable(s, grid):
        raise ValidationError(f"Departure SOC of session {s.id} is unreachable", field="soc_leave", value=s.soc_leave)
    dt = grid.dt_hours
    gain, loss = s.charge_gain(dt), s.discharge_loss(dt)
    p_ch = np.zeros(grid.n_steps)
    p_dis = np.zeros(grid.n_steps)
    soc_path = np.zeros(grid.n_steps)
    soc = s.soc_arrive
    for t in range(s.t_arrive, s.t_leave + 1):
        remaining = s.t_leave - t
        lo = max(s.soc_min, s.soc_leave - gain * remaining, soc - loss)
        hi = min(s.soc_max, s.soc_leave + loss * remaining, soc + gain)
        target = s.soc_leave if remaining == 0 else rng.uniform(lo, max(lo, hi))
        delta = target - soc
        if delta >= 0:
            p_ch[t] = min(s.p_ch_max, delta / (s.eta_ch * dt))
        else:
            p_dis[t] = min(s.p_dis_max, -delta * s.eta_dis / (s.eta_ref * dt))
        soc = soc_step(s, soc, p_ch[t], p_dis[t], dt)
        soc_path[t] = soc
    return SessionSchedule(p_ch, p_dis, soc_path)


def sessions_to_json(sessions: Iterable[EvSession]) -> str:
    return json.dumps([s.to_dict() for s in sessions], indent=2)


def sessions_from_json(text: str) -> List[EvSession]:
    return [EvSession.from_dict(item) for item in json.loads(text)]
