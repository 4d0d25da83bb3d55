"""Scenario document: grids, devices, stations, loads and prices

A scenario is one JSON document (``schema_version`` 1).  Parsing problems of
any kind surface as :class:`ConfigurationError` naming the file.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from ..core.exceptions import ConfigurationError, MenrollError
from ..core.logging_utils import get_logger, sanitize_for_logging
from ..devices.demand_response import DrParams
from ..devices.params import DeviceParams
from ..fleet.aggregation import StationEnvelope, aggregate
from ..fleet.sessions import EvSession, is_reachable
from ..fleet.synthesis import FleetSpec, synthesize_fleet
from .constants import DEFAULT_ETA_CONFIDENCE, SCHEMA_VERSION
from .forecast import ForecastModel, derive_seed
from .timegrid import Profile, TimeGrid, Unit

logger = get_logger(__name__)

BASELINE_RESOURCE = "baseline.json"


@dataclass(frozen=True)
class StationConfig:
    """A station's fleet, either synthesized from ``fleet`` or pinned as ``sessions``

    Pinned sessions are expressed on the day-ahead grid.
    """

    station_id: str
    fleet: Optional[FleetSpec] = None
    sessions: Tuple[EvSession, ...] = ()

    def __post_init__(self) -> None:
        if self.fleet is None and not self.sessions:
            raise ConfigurationError("Station needs a fleet spec or pinned sessions", setting=f"stations.{self.station_id}")

    def sessions_for(self, day_ahead: TimeGrid, target: Optional[TimeGrid] = None) -> List[EvSession]:
        """Sessions on ``target`` (default: the day-ahead grid)"""
        base = list(self.sessions) if self.sessions else synthesize_fleet(self.fleet, day_ahead)
        if target is None or target == day_ahead:
            return base
        return [s.rescaled(day_ahead, target) for s in base]

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "StationConfig":
        sid = str(data["station_id"])
        fleet = FleetSpec.from_dict(sid, data["fleet"]) if data.get("fleet") else None
        sessions = tuple(EvSession.from_dict({**s, "station_id": s.get("station_id", sid)}) for s in data.get("sessions", ()))
        return cls(sid, fleet, sessions)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"station_id": self.station_id}
        if self.fleet is not None:
            data["fleet"] = {k: v for k, v in self.fleet.to_dict().items() if k != "station_id"}
        if self.sessions:
            data["sessions"] = [s.to_dict() for s in self.sessions]
        return data


@dataclass(frozen=True)
class PriceParams:
    """Scheduling prices not tied to a device"""

    lambda_cur: float = 0.0
    c_evc: float = 0.0
    flatness_weight: float = 0.0

    def __post_init__(self) -> None:
        if min(self.lambda_cur, self.c_evc, self.flatness_weight) < 0:
            raise ConfigurationError("Prices must be nonnegative", setting="prices")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PriceParams":
        return cls(**{k: float(v) for k, v in data.items()})

    def to_dict(self) -> Dict[str, float]:
        return dict(self.__dict__)


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    day_ahead_grid: TimeGrid
    intra_day_grid: TimeGrid
    devices: DeviceParams
    stations: Tuple[StationConfig, ...]
    load_e: Profile
    load_h: Profile
    dr: DrParams
    eta_confidence: float = DEFAULT_ETA_CONFIDENCE
    prices: PriceParams = field(default_factory=PriceParams)
    penalty_rate: float = 0.0
    rolling: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        grid = self.day_ahead_grid
        profiles = {
            "loads.electric": self.load_e,
            "loads.heat": self.load_h,
            "devices.grid_tie.price_buy": self.devices.grid_tie.price_buy,
            "devices.pv": self.devices.pv.unit_profile.forecast,
            "devices.wt": self.devices.wt.unit_profile.forecast,
            "demand_response.curtail_cap_e": self.dr.curtail_cap_e,
        }
        for name, profile in profiles.items():
            if profile.grid != grid:
                raise ConfigurationError("Profile is not on the day-ahead grid", setting=name)
        if not 0.5 < self.eta_confidence < 1.0:
            raise ConfigurationError("Confidence level must lie in (0.5, 1)", setting="eta_confidence")
        if self.intra_day_grid.horizon_minutes != grid.horizon_minutes or not grid.is_alignable(self.intra_day_grid):
            raise ConfigurationError("Intra-day grid must refine the day-ahead grid", setting="grids.intra_day")
        if self.intra_day_grid.step_minutes > grid.step_minutes:
            raise ConfigurationError("Intra-day grid must not be coarser than the day-ahead grid", setting="grids.intra_day")
        if np.any(self.load_e.values < 0) or np.any(self.load_h.values < 0):
            raise ConfigurationError("Loads must be nonnegative", setting="loads")
        if self.penalty_rate < 0:
            raise ConfigurationError("Penalty rate must be nonnegative", setting="penalty_rate")
        ids = [s.station_id for s in self.stations]
        if len(set(ids)) != len(ids):
            raise ConfigurationError("Station ids must be unique", setting="stations")

    def renewable_forecast(self, tech: str) -> ForecastModel:
        """Fleet-level forecast model of ``"pv"`` or ``"wt"`` on the day-ahead grid"""
        try:
            return self.devices.renewables()[tech].fleet_forecast()
        except KeyError:
            raise ConfigurationError(f"Unknown renewable technology '{tech}'", setting="devices") from None

    def sigma_total(self) -> Profile:
        """Per-step std-dev of total renewable error, technologies independent"""
        pv, wt = self.renewable_forecast("pv").sigma, self.renewable_forecast("wt").sigma
        return pv.with_values(np.sqrt(pv.values ** 2 + wt.values ** 2))

    def with_seed(self, seed: int) -> "ScenarioConfig":
        """Copy whose realization seeds derive from ``seed``; fleets are unchanged"""
        devices = replace(
            self.devices,
            pv=self.devices.pv.with_seed(derive_seed(seed, "pv")),
            wt=self.devices.wt.with_seed(derive_seed(seed, "wt")),
        )
        return replace(self, devices=devices)

    def without_forecast_error(self) -> "ScenarioConfig":
        """Copy with zero forecast error at both stages"""
        renewables = {}
        for tech, params in self.devices.renewables().items():
            unit = params.unit_profile
            renewables[tech] = replace(
                params,
                unit_profile=ForecastModel(unit.forecast, Profile.zeros(unit.grid, Unit.KW), unit.seed),
                intra_sigma_fraction=0.0,
            )
        return replace(self, devices=replace(self.devices, **renewables))

    def sessions(self, grid: Optional[TimeGrid] = None) -> Dict[str, List[EvSession]]:
        return {st.station_id: st.sessions_for(self.day_ahead_grid, grid) for st in self.stations}

    def envelopes(self, grid: Optional[TimeGrid] = None) -> List[StationEnvelope]:
        grid = grid or self.day_ahead_grid
        envs = []
        for sid, sessions in self.sessions(grid).items():
            env = aggregate(sessions, grid, station_id=sid)
            logger.debug(
                f"Station {sanitize_for_logging(sid)}: {env.n_sessions} sessions, "
                f"peak charge cap {env.p_ch_max.values.max(initial=0.0):.1f} kW"
            )
            envs.append(env)
        return envs

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ScenarioConfig":
        version = data.get("schema_version")
        if version != SCHEMA_VERSION:
            raise ConfigurationError(f"Unsupported schema_version {version!r}", setting="schema_version")
        grids = data.get("grids", {})
        da = TimeGrid.from_dict(grids["day_ahead"]) if "day_ahead" in grids else TimeGrid.day_ahead()
        intra = TimeGrid.from_dict(grids["intra_day"]) if "intra_day" in grids else TimeGrid.intra_day()
        return cls(
            name=str(data.get("name", "scenario")),
            day_ahead_grid=da,
            intra_day_grid=intra,
            devices=DeviceParams.from_dict(da, data["devices"]),
            stations=tuple(StationConfig.from_dict(s) for s in data.get("stations", ())),
            load_e=Profile.from_dict(da, data["loads"]["electric"], Unit.KW),
            load_h=Profile.from_dict(da, data["loads"]["heat"], Unit.KW),
            dr=DrParams.from_dict(da, data["demand_response"]),
            eta_confidence=float(data.get("eta_confidence", DEFAULT_ETA_CONFIDENCE)),
            prices=PriceParams.from_dict(data.get("prices", {})),
            penalty_rate=float(data.get("penalty_rate", 0.0)),
            rolling=dict(data.get("rolling", {})),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "name": self.name,
            "grids": {"day_ahead": self.day_ahead_grid.to_dict(), "intra_day": self.intra_day_grid.to_dict()},
            "loads": {"electric": self.load_e.to_dict(), "heat": self.load_h.to_dict()},
            "devices": self.devices.to_dict(),
            "stations": [s.to_dict() for s in self.stations],
            "demand_response": self.dr.to_dict(),
            "eta_confidence": self.eta_confidence,
            "prices": self.prices.to_dict(),
            "penalty_rate": self.penalty_rate,
            "rolling": dict(self.rolling),
        }


def parse_scenario(data: Dict[str, Any], source: str = "<memory>") -> ScenarioConfig:
    try:
        return ScenarioConfig.from_dict(data)
    except ConfigurationError as exc:
        exc.config_file = exc.config_file or source
        raise
    except MenrollError as exc:
        raise ConfigurationError(exc.message, details=exc.details, config_file=source,
                                 setting=getattr(exc, "field", None)) from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigurationError(f"Malformed scenario: {exc!r}", config_file=source) from exc


def load_scenario(path: Union[str, Path]) -> ScenarioConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError("Cannot read scenario", details=str(exc), config_file=str(path)) from exc
    cfg = parse_scenario(data, str(path))
    logger.info(f"Scenario '{sanitize_for_logging(cfg.name)}' loaded from {sanitize_for_logging(str(path))}")
    return cfg


def load_baseline() -> ScenarioConfig:
    """The bundled baseline fixture"""
    text = resources.files("menroll.data").joinpath(BASELINE_RESOURCE).read_text(encoding="utf-8")
    return parse_scenario(json.loads(text), BASELINE_RESOURCE)


def dump_scenario(cfg: ScenarioConfig, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def scenario_hash(cfg: ScenarioConfig) -> str:
    """SHA-256 of the canonical JSON form"""
    canonical = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def lint_scenario(raw: Dict[str, Any]) -> List[str]:
    """Problems found in a raw scenario document; empty when it is usable"""
    issues: List[str] = []
    for key in ("devices", "loads", "demand_response"):
        if key not in raw:
            issues.append(f"missing section '{key}'")
    if issues:
        return issues
    try:
        cfg = parse_scenario(raw)
    except ConfigurationError as exc:
        return [str(exc)]

    for st in cfg.stations:
        for s in st.sessions:
            try:
                s.check_grid(cfg.day_ahead_grid)
            except MenrollError as exc:
                issues.append(f"station {st.station_id}: {exc}")
                continue
            if not is_reachable(s, cfg.day_ahead_grid):
                issues.append(f"station {st.station_id}: session {s.id} cannot reach its departure SOC")
    if cfg.load_h.values.any() and cfg.devices.heat is None:
        issues.append("heat load present but no heat system configured")
    supply = cfg.devices.grid_tie.buy_cap
    if cfg.devices.gas_turbine is not None:
        supply += cfg.devices.gas_turbine.p_max
    if cfg.devices.battery is not None:
        supply += cfg.devices.battery.p_rated
    peak_step = int(np.argmax(cfg.load_e.values))
    if cfg.load_e[peak_step] > supply + cfg.renewable_forecast("pv").forecast[peak_step] + cfg.renewable_forecast("wt").forecast[peak_step]:
        issues.append(f"electric load at step {peak_step} exceeds total supply capacity")
    unknown = set(raw) - {
        "schema_version", "name", "grids", "loads", "devices", "stations", "demand_response",
        "eta_confidence", "prices", "penalty_rate", "rolling",
    }
    issues.extend(f"unknown top-level key '{key}'" for key in sorted(unknown))
    return issues
