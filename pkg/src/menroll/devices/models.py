"""Closed-form device physics"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from ..core.exceptions import ValidationError
from ..scenario.timegrid import Profile
from .constants import FUEL_ERROR_SAMPLES
from .params import BatteryParams, GasTurbineParams, RenewableParams


def battery_power_caps(b: BatteryParams, soc_prev: float, dt: float = 1.0) -> Tuple[float, float]:
    """Charge and discharge limits for one step starting at ``soc_prev`` (fraction)

    Charging is limited by the room below ``soc_max``, discharging by the
    energy above ``soc_min``, both by the rated power.
    """
    if not 0.0 <= soc_prev <= 1.0:
        raise ValidationError("State of charge must be a fraction", field="soc_prev", value=soc_prev)
    p_ch = min(max(b.soc_max - soc_prev, 0.0) * b.capacity / b.eta_ch / dt, b.p_rated)
    p_dis = min(max(soc_prev - b.soc_min, 0.0) * b.capacity * b.eta_dis / dt, b.p_rated)
    return p_ch, p_dis


def renewable_available(r: RenewableParams, realization: Profile) -> Profile:
    """Installation output for a per-unit realization on any grid"""
    return realization.scaled(float(r.n_units))


def fuel_rate(g: GasTurbineParams, p) -> np.ndarray:
    """Fuel cost per hour at output ``p``"""
    a, b, c, d = g.fuel_coeffs
    p = np.asarray(p, dtype=float)
    return ((a * p + b) * p + c) * p + d


@dataclass(frozen=True)
class PwlCurve:
    xs: np.ndarray
    ys: np.ndarray
    max_error: float

    @property
    def breakpoints(self) -> List[Tuple[float, float]]:
        return [(float(x), float(y)) for x, y in zip(self.xs, self.ys)]

    def __call__(self, x) -> np.ndarray:
        return np.interp(x, self.xs, self.ys)


def gt_fuel_pwl(g: GasTurbineParams) -> PwlCurve:
    """Equally spaced interpolation of the fuel curve on ``[p_min, p_max]``

    ``max_error`` is measured on a fixed sample of the interval, so curves
    with nested breakpoints compare consistently.  A fixed-output turbine
    (``p_min == p_max``) gets a single-point curve.
    """
    if g.p_min == g.p_max:
        xs = np.array([float(g.p_max)])
        return PwlCurve(xs, fuel_rate(g, xs), 0.0)
    xs = np.linspace(g.p_min, g.p_max, g.pwl_segments + 1)
    ys = fuel_rate(g, xs)
    sample = np.linspace(g.p_min, g.p_max, FUEL_ERROR_SAMPLES)
    error = float(np.max(np.abs(np.interp(sample, xs, ys) - fuel_rate(g, sample))))
    return PwlCurve(xs, ys, error)
