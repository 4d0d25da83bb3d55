"""Uniform time axes, per-step profiles and resampling between grids"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Sequence, Union

import numpy as np

from ..core.exceptions import AlignmentError, ValidationError
from .constants import DAY_AHEAD_STEP_MINUTES, HORIZON_MINUTES, INTRA_DAY_STEP_MINUTES


class Unit(str, Enum):
    """Physical unit of a profile"""

    KW = "kW"
    KWH = "kWh"
    PRICE = "currency-per-kWh"
    DIMENSIONLESS = "dimensionless"

    @property
    def is_energy(self) -> bool:
        """Per-step energy quantities split and sum instead of repeating and averaging"""
        return self is Unit.KWH


@dataclass(frozen=True)
class TimeGrid:
    """Discrete horizon ``n_steps`` steps of ``step_minutes`` starting at ``start_hour``"""

    start_hour: float
    step_minutes: int
    n_steps: int

    def __post_init__(self) -> None:
        if int(self.step_minutes) != self.step_minutes or self.step_minutes <= 0:
            raise ValidationError("Step length must be a positive number of minutes", field="step_minutes", value=self.step_minutes)
        if int(self.n_steps) != self.n_steps or self.n_steps <= 0:
            raise ValidationError("Grid needs at least one step", field="n_steps", value=self.n_steps)
        if not 0 <= self.start_hour <= 24:
            raise ValidationError("Start hour must lie within the day", field="start_hour", value=self.start_hour)

    @classmethod
    def day_ahead(cls) -> "TimeGrid":
        return cls(0.0, DAY_AHEAD_STEP_MINUTES, HORIZON_MINUTES // DAY_AHEAD_STEP_MINUTES)

    @classmethod
    def intra_day(cls) -> "TimeGrid":
        return cls(0.0, INTRA_DAY_STEP_MINUTES, HORIZON_MINUTES // INTRA_DAY_STEP_MINUTES)

    @property
    def dt_hours(self) -> float:
        return self.step_minutes / 60.0

    @property
    def horizon_minutes(self) -> int:
        return self.step_minutes * self.n_steps

    def hours(self) -> np.ndarray:
        """Hour of day at the start of each step"""
        return self.start_hour + np.arange(self.n_steps) * self.dt_hours

    def step_of_hour(self, hour: float) -> int:
        """Index of the step containing ``hour``"""
        step = int(np.floor((hour - self.start_hour) / self.dt_hours + 1e-9))
        if not 0 <= step < self.n_steps:
            raise ValidationError("Hour outside the grid", field="hour", value=hour)
        return step

    def is_alignable(self, other: "TimeGrid") -> bool:
        """True when one step length is an integer multiple of the other"""
        big, small = max(self.step_minutes, other.step_minutes), min(self.step_minutes, other.step_minutes)
        return big % small == 0

    def ratio_to(self, finer: "TimeGrid") -> int:
        """Number of ``finer`` steps inside one step of this grid"""
        if not self.is_alignable(finer) or self.step_minutes < finer.step_minutes:
            raise AlignmentError(
                f"{finer.step_minutes}-minute steps do not subdivide {self.step_minutes}-minute steps",
                source_steps=self.n_steps,
                target_steps=finer.n_steps,
            )
        return self.step_minutes // finer.step_minutes

    def to_dict(self) -> Dict[str, Any]:
        return {"start_hour": self.start_hour, "step_minutes": self.step_minutes, "n_steps": self.n_steps}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TimeGrid":
        return cls(float(data.get("start_hour", 0.0)), int(data["step_minutes"]), int(data["n_steps"]))


class Profile:
    """Immutable per-step series on a grid"""

    __slots__ = ("grid", "values", "unit")

    def __init__(self, grid: TimeGrid, values: Union[Sequence[float], np.ndarray], unit: Union[Unit, str] = Unit.KW) -> None:
        arr = np.array(values, dtype=float, copy=True).reshape(-1)
        if arr.shape[0] != grid.n_steps:
            raise ValidationError(
                f"Profile has {arr.shape[0]} values for a {grid.n_steps}-step grid",
                field="values",
            )
        if not np.all(np.isfinite(arr)):
            raise ValidationError("Profile values must be finite", field="values")
        arr.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "unit", Unit(unit))

    def __setattr__(self, name: str, value: Any) -> None:
        raise AttributeError("Profile is immutable")

    def __copy__(self) -> "Profile":
        return self

    def __deepcopy__(self, memo: Dict[int, Any]) -> "Profile":
        return self

    def __reduce__(self):
        return (Profile, (self.grid, self.values, self.unit))

    def __len__(self) -> int:
        return self.grid.n_steps

    def __getitem__(self, index):
        return self.values[index]

    def __repr__(self) -> str:
        return f"Profile({self.grid.n_steps}x{self.grid.step_minutes}min, unit={self.unit.value})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Profile):
            return NotImplemented
        return self.grid == other.grid and self.unit == other.unit and np.array_equal(self.values, other.values)

    __hash__ = None  # type: ignore[assignment]

    @classmethod
    def constant(cls, grid: TimeGrid, value: float, unit: Union[Unit, str] = Unit.KW) -> "Profile":
        return cls(grid, np.full(grid.n_steps, float(value)), unit)

    @classmethod
    def zeros(cls, grid: TimeGrid, unit: Union[Unit, str] = Unit.KW) -> "Profile":
        return cls.constant(grid, 0.0, unit)

    def with_values(self, values: Union[Sequence[float], np.ndarray]) -> "Profile":
        return Profile(self.grid, values, self.unit)

    def scaled(self, factor: float) -> "Profile":
        return Profile(self.grid, self.values * factor, self.unit)

    def __add__(self, other: "Profile") -> "Profile":
        if not isinstance(other, Profile):
            return NotImplemented
        if other.grid != self.grid or other.unit != self.unit:
            raise ValidationError("Cannot add profiles on different grids or units")
        return Profile(self.grid, self.values + other.values, self.unit)

    def energy(self) -> float:
        """Total energy over the horizon (kWh for power and per-step energy profiles)"""
        if self.unit.is_energy:
            return float(self.values.sum())
        return float(self.values.sum() * self.grid.dt_hours)

    def window(self, start: int, stop: int) -> np.ndarray:
        """Copy of the values of steps ``start`` up to ``stop``"""
        return np.array(self.values[start:stop])

    def to_dict(self) -> Dict[str, Any]:
        return {"unit": self.unit.value, "values": [float(v) for v in self.values]}

    @classmethod
    def from_dict(cls, grid: TimeGrid, data: Union[Dict[str, Any], Sequence[float]], unit: Union[Unit, str] = Unit.KW) -> "Profile":
        """Read ``{"unit": ..., "values": [...]}`` or a bare list carrying ``unit``"""
        if isinstance(data, dict):
            return cls(grid, data["values"], data.get("unit", unit))
        return cls(grid, data, unit)


def resample(p: Profile, target: TimeGrid) -> Profile:
    """Map ``p`` onto ``target``, preserving energy per coarse step

    Power-like units refine piecewise-constant and coarsen by averaging;
    per-step energy (kWh) refines by equal split and coarsens by summation.

    Raises:
        AlignmentError: if the grids cover different spans or their step
            lengths are not integer multiples of each other
    """
    source = p.grid
    if source.horizon_minutes != target.horizon_minutes or not np.isclose(source.start_hour, target.start_hour):
        raise AlignmentError(
            "Grids cover different horizons",
            details=f"{source.horizon_minutes} vs {target.horizon_minutes} minutes",
            source_steps=source.n_steps,
            target_steps=target.n_steps,
        )
    if not source.is_alignable(target):
        raise AlignmentError(source_steps=source.n_steps, target_steps=target.n_steps)

    if source.step_minutes == target.step_minutes:
        return Profile(target, p.values, p.unit)

    if source.step_minutes > target.step_minutes:
        k = source.step_minutes // target.step_minutes
        values = np.repeat(p.values, k)
        if p.unit.is_energy:
            values = values / k
        return Profile(target, values, p.unit)

    k = target.step_minutes // source.step_minutes
    blocks = p.values.reshape(target.n_steps, k)
    values = blocks.sum(axis=1) if p.unit.is_energy else blocks.mean(axis=1)
    return Profile(target, values, p.unit)
