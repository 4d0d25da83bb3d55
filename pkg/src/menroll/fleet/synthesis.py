"""Seeded synthetic EV fleets"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Tuple

import numpy as np

from ..core.exceptions import ValidationError
from ..core.logging_utils import get_logger, sanitize_for_logging
from ..scenario.forecast import make_rng
from ..scenario.timegrid import TimeGrid
from .constants import (
    DEFAULT_ARRIVAL_COHORTS,
    DEFAULT_P_MAX_KW,
    DEFAULT_SOC_ARRIVE_FRACTION,
    DEFAULT_SOC_LEAVE_FRACTION,
    DEFAULT_SOC_MAX_KWH,
    DEFAULT_SOC_MIN_FRACTION,
    DEFAULT_STAY_HOURS,
)
from .sessions import EvSession, max_reachable_soc

logger = get_logger(__name__)


def _pair(value: Any, name: str) -> Tuple[float, float]:
    lo, hi = (float(v) for v in value)
    if lo > hi:
        raise ValidationError("Range lower end exceeds upper end", field=name, value=(lo, hi))
    return lo, hi


@dataclass(frozen=True)
class FleetSpec:
    """Distribution parameters for one station's fleet

    ``arrival_cohorts`` holds ``(mean_hour, std_hours, weight)`` triples.
    Efficiencies are fleet-uniform so the station envelope stays well defined.
    """

    station_id: str
    n_evs: int
    seed: int
    arrival_cohorts: Tuple[Tuple[float, float, float], ...] = DEFAULT_ARRIVAL_COHORTS
    stay_hours: Tuple[float, float] = DEFAULT_STAY_HOURS
    soc_arrive_fraction: Tuple[float, float] = DEFAULT_SOC_ARRIVE_FRACTION
    soc_leave_fraction: Tuple[float, float] = DEFAULT_SOC_LEAVE_FRACTION
    soc_min_fraction: float = DEFAULT_SOC_MIN_FRACTION
    soc_max_kwh: Tuple[float, float] = DEFAULT_SOC_MAX_KWH
    p_ch_max: float = DEFAULT_P_MAX_KW
    p_dis_max: float = DEFAULT_P_MAX_KW
    eta_ch: float = 0.95
    eta_dis: float = 0.95
    eta_ref: float = 1.0

    def __post_init__(self) -> None:
        if self.n_evs < 0:
            raise ValidationError("Fleet size must be nonnegative", field="n_evs", value=self.n_evs)
        if self.seed < 0:
            raise ValidationError("Seed must be unsigned", field="seed", value=self.seed)
        if not self.arrival_cohorts:
            raise ValidationError("At least one arrival cohort is required", field="arrival_cohorts")
        for mean, std, weight in self.arrival_cohorts:
            if not 0 <= mean <= 24 or std < 0 or weight <= 0:
                raise ValidationError("Arrival cohort outside the day", field="arrival_cohorts", value=(mean, std, weight))
        lo, _ = _pair(self.stay_hours, "stay_hours")
        if lo <= 0:
            raise ValidationError("Stays must be positive", field="stay_hours", value=self.stay_hours)
        for name in ("soc_arrive_fraction", "soc_leave_fraction"):
            lo, hi = _pair(getattr(self, name), name)
            if lo < self.soc_min_fraction or hi > 1.0:
                raise ValidationError("SOC fraction outside [soc_min_fraction, 1]", field=name, value=(lo, hi))
        if not 0 <= self.soc_min_fraction < 1:
            raise ValidationError("SOC floor fraction must lie in [0, 1)", field="soc_min_fraction")
        if _pair(self.soc_max_kwh, "soc_max_kwh")[0] <= 0:
            raise ValidationError("Battery size must be positive", field="soc_max_kwh")
        if self.p_ch_max < 0 or self.p_dis_max < 0:
            raise ValidationError("Power limits must be nonnegative", field="p_ch_max")
        if not (0 < self.eta_ch <= 1 and 0 < self.eta_dis <= 1 and self.eta_ref > 0):
            raise ValidationError("Efficiencies must lie in (0, 1]", field="eta_ch")

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["arrival_cohorts"] = [list(c) for c in self.arrival_cohorts]
        return data

    @classmethod
    def from_dict(cls, station_id: str, data: Dict[str, Any]) -> "FleetSpec":
        kwargs = {k: v for k, v in data.items() if k != "station_id"}
        if "arrival_cohorts" in kwargs:
            kwargs["arrival_cohorts"] = tuple(tuple(float(x) for x in c) for c in kwargs["arrival_cohorts"])
        for name in ("stay_hours", "soc_arrive_fraction", "soc_leave_fraction", "soc_max_kwh"):
            if name in kwargs:
                kwargs[name] = tuple(float(x) for x in kwargs[name])
        return cls(station_id=station_id, **kwargs)


def synthesize_fleet(spec: FleetSpec, grid: TimeGrid) -> List[EvSession]:
    """Draw ``spec.n_evs`` sessions on ``grid``

    Every vehicle consumes the same number of draws, so the sequence is fixed
    by the seed alone.  Departure targets that cannot be reached at full
    charging power are lowered to the reachable maximum.
    """
    rng = make_rng(spec.seed, 0)
    dt = grid.dt_hours
    weights = np.array([c[2] for c in spec.arrival_cohorts], dtype=float)
    weights = weights / weights.sum()
    first_hour = grid.start_hour
    last_hour = grid.start_hour + (grid.n_steps - 1) * dt

    sessions: List[EvSession] = []
    repaired = 0
    for i in range(spec.n_evs):
        cohort = spec.arrival_cohorts[int(rng.choice(len(weights), p=weights))]
        arrive_hour = float(np.clip(rng.normal(cohort[0], cohort[1]), first_hour, last_hour))
        stay = rng.uniform(*spec.stay_hours)
        soc_max = rng.uniform(*spec.soc_max_kwh)
        arrive_frac = rng.uniform(*spec.soc_arrive_fraction)
        leave_frac = rng.uniform(*spec.soc_leave_fraction)

        t_arrive = grid.step_of_hour(arrive_hour)
        t_leave = min(grid.n_steps - 1, t_arrive + max(1, int(round(stay / dt))) - 1)
        soc_min = spec.soc_min_fraction * soc_max
        soc_arrive = arrive_frac * soc_max
        draft = EvSession(
            id=f"{spec.station_id}-EV{i:03d}",
            station_id=spec.station_id,
            t_arrive=t_arrive,
            t_leave=t_leave,
            soc_arrive=soc_arrive,
            soc_leave=soc_arrive,
            soc_min=soc_min,
            soc_max=soc_max,
            p_ch_max=spec.p_ch_max,
            p_dis_max=spec.p_dis_max,
            eta_ch=spec.eta_ch,
            eta_dis=spec.eta_dis,
            eta_ref=spec.eta_ref,
        )
        target = leave_frac * soc_max
        reachable = max_reachable_soc(draft, dt)
        if target > reachable:
            repaired += 1
            target = reachable
        sessions.append(
            EvSession(**{**draft.to_dict(), "soc_leave": max(soc_arrive, target)})
        )

    if repaired:
        logger.warning(
            f"Station {sanitize_for_logging(spec.station_id)}: lowered {repaired} of {spec.n_evs} "
            "departure targets to the reachable maximum"
        )
    logger.debug(f"Synthesized {len(sessions)} sessions for station {sanitize_for_logging(spec.station_id)}")
    return sessions
