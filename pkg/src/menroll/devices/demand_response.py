"""Flexible load: energy-neutral shifting and compensated curtailment

Shifting moves electric load out of peak steps into valley steps and is
steered only by the time-of-use prices of the tie-line.  Curtailment of
electric and heat load is paid for at ``lambda_e`` / ``lambda_h``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict, FrozenSet, List, Optional, Tuple

import numpy as np

from ..core.exceptions import ValidationError
from ..milp.model import MilpModel, Sense, Variable, lin_sum
from ..scenario.timegrid import Profile, TimeGrid, Unit

# Effective loads this far below zero are solver noise and clip to zero
LOAD_TOLERANCE = 1e-6


@dataclass(frozen=True)
class DrParams:
    shiftable_fraction_e: float
    shift_balance_window: int
    curtail_cap_e: Profile
    curtail_cap_h: Profile
    lambda_e: float
    lambda_h: float
    peak_steps: FrozenSet[int]
    valley_steps: FrozenSet[int]

    def __post_init__(self) -> None:
        if not 0.0 <= self.shiftable_fraction_e <= 1.0:
            raise ValidationError("Shiftable fraction must lie in [0, 1]", field="shiftable_fraction_e", value=self.shiftable_fraction_e)
        if self.shift_balance_window <= 0:
            raise ValidationError("Balance window must be positive", field="shift_balance_window", value=self.shift_balance_window)
        if np.any(self.curtail_cap_e.values < 0) or np.any(self.curtail_cap_h.values < 0):
            raise ValidationError("Curtailment caps must be nonnegative", field="curtail_cap_e")
        if self.lambda_e < 0 or self.lambda_h < 0:
            raise ValidationError("Compensation rates must be nonnegative", field="lambda_e")
        overlap = self.peak_steps & self.valley_steps
        if overlap:
            raise ValidationError("Peak and valley steps overlap", field="peak_steps", value=sorted(overlap))
        n = self.grid.n_steps
        if any(not 0 <= t < n for t in self.peak_steps | self.valley_steps):
            raise ValidationError("Peak or valley step outside the grid", field="peak_steps")

    @property
    def grid(self) -> TimeGrid:
        return self.curtail_cap_e.grid

    @classmethod
    def from_dict(cls, grid: TimeGrid, data: Dict[str, Any]) -> "DrParams":
        return cls(
            shiftable_fraction_e=float(data.get("shiftable_fraction_e", 0.0)),
            shift_balance_window=int(data.get("shift_balance_window", grid.n_steps)),
            curtail_cap_e=Profile.from_dict(grid, data["curtail_cap_e"], Unit.KW),
            curtail_cap_h=Profile.from_dict(grid, data["curtail_cap_h"], Unit.KW),
            lambda_e=float(data.get("lambda_e", 0.0)),
            lambda_h=float(data.get("lambda_h", 0.0)),
            peak_steps=frozenset(int(t) for t in data.get("peak_steps", ())),
            valley_steps=frozenset(int(t) for t in data.get("valley_steps", ())),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "shiftable_fraction_e": self.shiftable_fraction_e,
            "shift_balance_window": self.shift_balance_window,
            "curtail_cap_e": self.curtail_cap_e.to_dict(),
            "curtail_cap_h": self.curtail_cap_h.to_dict(),
            "lambda_e": self.lambda_e,
            "lambda_h": self.lambda_h,
            "peak_steps": sorted(self.peak_steps),
            "valley_steps": sorted(self.valley_steps),
        }


@dataclass(frozen=True)
class DrDecision:
    shift_in: Profile
    shift_out: Profile
    curtail_e: Profile
    curtail_h: Profile

    @property
    def grid(self) -> TimeGrid:
        return self.shift_in.grid

    @classmethod
    def zeros(cls, grid: TimeGrid) -> "DrDecision":
        zero = Profile.zeros(grid, Unit.KW)
        return cls(zero, zero, zero, zero)

    def is_zero(self) -> bool:
        return not any(np.any(p.values) for p in (self.shift_in, self.shift_out, self.curtail_e, self.curtail_h))

    def check(self, params: DrParams, base_e: Profile, base_h: Profile, tolerance: float = LOAD_TOLERANCE) -> None:
        """Raise ValidationError unless the decision respects ``params``"""
        n = self.grid.n_steps
        frac = params.shiftable_fraction_e
        for t in range(n):
            out_cap = frac * base_e[t] if t in params.peak_steps else 0.0
            in_cap = frac * base_e[t] if t in params.valley_steps else 0.0
            if not -tolerance <= self.shift_out[t] <= out_cap + tolerance:
                raise ValidationError("Shifted-out load outside its limit", field="shift_out", value=(t, float(self.shift_out[t])))
            if not -tolerance <= self.shift_in[t] <= in_cap + tolerance:
                raise ValidationError("Shifted-in load outside its limit", field="shift_in", value=(t, float(self.shift_in[t])))
            if not -tolerance <= self.curtail_e[t] <= params.curtail_cap_e[t] + tolerance:
                raise ValidationError("Electric curtailment outside its cap", field="curtail_e", value=(t, float(self.curtail_e[t])))
            if not -tolerance <= self.curtail_h[t] <= params.curtail_cap_h[t] + tolerance:
                raise ValidationError("Heat curtailment outside its cap", field="curtail_h", value=(t, float(self.curtail_h[t])))
        for start, stop in balance_windows(n, params.shift_balance_window):
            moved = float(np.sum(self.shift_in.values[start:stop]) - np.sum(self.shift_out.values[start:stop]))
            if abs(moved) > tolerance:
                raise ValidationError("Shifting is not energy neutral", field="shift_in", value=(start, moved))

    def to_dict(self) -> Dict[str, List[float]]:
        return {name: getattr(self, name).to_dict()["values"] for name in ("shift_in", "shift_out", "curtail_e", "curtail_h")}


def balance_windows(n_steps: int, window: int) -> List[Tuple[int, int]]:
    return [(start, min(start + window, n_steps)) for start in range(0, n_steps, window)]


def effective_loads(base_e: Profile, base_h: Profile, d: DrDecision) -> Tuple[Profile, Profile]:
    """Loads after shifting and curtailment

    Raises:
        ValidationError: if either effective load goes negative
    """
    load_e = base_e.values - d.shift_out.values + d.shift_in.values - d.curtail_e.values
    load_h = base_h.values - d.curtail_h.values
    for name, values in (("load_e", load_e), ("load_h", load_h)):
        if np.any(values < -LOAD_TOLERANCE):
            t = int(np.argmin(values))
            raise ValidationError("Effective load is negative", field=name, value=(t, float(values[t])))
    return base_e.with_values(np.maximum(load_e, 0.0)), base_h.with_values(np.maximum(load_h, 0.0))


def dr_cost(d: DrDecision, p: DrParams) -> float:
    """Curtailment compensation; shifting carries no direct payment"""
    dt = d.grid.dt_hours
    return float(p.lambda_e * d.curtail_e.values.sum() * dt + p.lambda_h * d.curtail_h.values.sum() * dt)


@dataclass
class DrVars:
    shift_in: List[Variable]
    shift_out: List[Variable]
    curtail_e: List[Variable]
    curtail_h: List[Variable]


def add_demand_response(
    model: MilpModel,
    params: DrParams,
    base_e: Profile,
    base_h: Profile,
    enabled: bool = True,
    prefix: str = "dr",
) -> Optional[DrVars]:
    """Declare DR variables and limits; returns None (no variables) when disabled"""
    if not enabled:
        return None
    n = base_e.grid.n_steps
    frac = params.shiftable_fraction_e
    out = DrVars([], [], [], [])
    for t in range(n):
        out_cap = frac * base_e[t] if t in params.peak_steps else 0.0
        in_cap = frac * base_e[t] if t in params.valley_steps else 0.0
        s_in = model.add_var(f"{prefix}_shift_in[{t}]", 0.0, in_cap)
        s_out = model.add_var(f"{prefix}_shift_out[{t}]", 0.0, out_cap)
        cut_e = model.add_var(f"{prefix}_curtail_e[{t}]", 0.0, float(params.curtail_cap_e[t]))
        cut_h = model.add_var(f"{prefix}_curtail_h[{t}]", 0.0, min(float(params.curtail_cap_h[t]), max(float(base_h[t]), 0.0)))
        model.add_constraint(s_out + cut_e - s_in, Sense.LE, float(base_e[t]), f"{prefix}_load_nonneg[{t}]")
        out.shift_in.append(s_in)
        out.shift_out.append(s_out)
        out.curtail_e.append(cut_e)
        out.curtail_h.append(cut_h)
    for start, stop in balance_windows(n, params.shift_balance_window):
        model.add_constraint(
            lin_sum(out.shift_in[start:stop]) - lin_sum(out.shift_out[start:stop]),
            Sense.EQ, 0.0, f"{prefix}_neutral[{start}]",
        )
    return out
