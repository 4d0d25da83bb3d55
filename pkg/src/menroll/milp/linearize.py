"""Linearization helpers: absolute value, piecewise-linear cost, exclusive pairs"""
from __future__ import annotations

from typing import Optional, Sequence, Tuple, Union

import numpy as np

from ..core.exceptions import ModelingError
from .model import LinExpr, MilpModel, Sense, Variable, lin_sum

Expr = Union[Variable, LinExpr]


def add_abs(model: MilpModel, x: Expr, big_m: Optional[float] = None, name: str = "abs") -> Variable:
    """Epigraph variable ``a >= |x|``

    ``a`` equals ``|x|`` only at a minimum where ``a`` carries a positive
    objective coefficient; callers without that pressure must split ``x``
    with :func:`add_exclusive_pair` instead.  ``big_m`` defaults to the
    magnitude implied by the bounds of ``x``.
    """
    lo, hi = model.expr_bounds(x)
    needed = max(abs(lo), abs(hi))
    if big_m is None:
        big_m = needed
    elif big_m < needed - 1e-9:
        raise ModelingError(
            f"big_m {big_m} is smaller than the bound range {needed} of the argument",
            variable=name,
        )
    a = model.add_var(name, 0.0, big_m)
    model.add_constraint(a - x, Sense.GE, 0.0, f"{name}_pos")
    model.add_constraint(a + x, Sense.GE, 0.0, f"{name}_neg")
    return a


def add_pwl(
    model: MilpModel,
    x: Expr,
    breakpoints: Sequence[Tuple[float, float]],
    active: Optional[Variable] = None,
    name: str = "pwl",
) -> Variable:
    """Incremental piecewise-linear ``cost = f(x)`` through ``breakpoints``

    Segment fill variables ``d_k`` in [0, 1] and order binaries ``z_k`` with
    ``d_{k+1} <= z_k <= d_k`` force segments to fill left to right, so the
    cost matches the interpolant exactly whether or not ``f`` is convex.
    With ``active`` given, ``x`` and the cost collapse to zero when it is 0.
    A single breakpoint pins ``x`` to that point.
    """
    if not breakpoints:
        raise ModelingError("Piecewise-linear curve needs at least one breakpoint", variable=name)
    xs = np.array([float(p[0]) for p in breakpoints])
    ys = np.array([float(p[1]) for p in breakpoints])
    if np.any(np.diff(xs) <= 0):
        raise ModelingError("Breakpoints must be strictly increasing in x", variable=name)
    if len(xs) == 1:
        return _add_point(model, x, float(xs[0]), float(ys[0]), active, name)

    k = len(xs) - 1
    fill = model.add_vars(f"{name}_d", k, 0.0, 1.0)
    order = model.add_vars(f"{name}_z", k - 1, binary=True)
    for i, z in enumerate(order):
        model.add_constraint(z - fill[i], Sense.LE, 0.0, f"{name}_order_lo[{i}]")
        model.add_constraint(fill[i + 1] - z, Sense.LE, 0.0, f"{name}_order_hi[{i}]")

    dx, dy = np.diff(xs), np.diff(ys)
    x_expr = lin_sum(float(dx[i]) * fill[i] for i in range(k))
    y_expr = lin_sum(float(dy[i]) * fill[i] for i in range(k))
    if active is None:
        x_expr += xs[0]
        y_expr += ys[0]
        cost_lo, cost_hi = float(ys.min()), float(ys.max())
    else:
        x_expr += float(xs[0]) * active
        y_expr += float(ys[0]) * active
        model.add_constraint(fill[0] - active, Sense.LE, 0.0, f"{name}_active")
        cost_lo, cost_hi = min(0.0, float(ys.min())), max(0.0, float(ys.max()))

    cost = model.add_var(f"{name}_cost", cost_lo, cost_hi)
    model.add_constraint(x - x_expr, Sense.EQ, 0.0, f"{name}_x")
    model.add_constraint(cost - y_expr, Sense.EQ, 0.0, f"{name}_y")
    return cost


def _add_point(model: MilpModel, x: Expr, x0: float, y0: float, active: Optional[Variable], name: str) -> Variable:
    if active is None:
        cost = model.add_var(f"{name}_cost", y0, y0)
        model.add_constraint(x, Sense.EQ, x0, f"{name}_x")
        return cost
    cost = model.add_var(f"{name}_cost", min(0.0, y0), max(0.0, y0))
    model.add_constraint(x - x0 * active, Sense.EQ, 0.0, f"{name}_x")
    model.add_constraint(cost - y0 * active, Sense.EQ, 0.0, f"{name}_y")
    return cost


def add_exclusive_pair(
    model: MilpModel,
    x: Variable,
    y: Variable,
    x_cap: Optional[float] = None,
    y_cap: Optional[float] = None,
    name: str = "mode",
) -> Variable:
    """Binary ``b`` with ``x <= x_cap * b`` and ``y <= y_cap * (1 - b)``

    Caps default to the upper bounds of ``x`` and ``y``.
    """
    if x_cap is None:
        x_cap = model.bounds(x)[1]
    if y_cap is None:
        y_cap = model.bounds(y)[1]
    for cap, var in ((x_cap, x), (y_cap, y)):
        if not np.isfinite(cap) or cap < 0:
            raise ModelingError(f"Exclusive pair needs a finite nonnegative cap, got {cap}", variable=var.name)
    b = model.add_var(name, binary=True)
    model.add_constraint(x - x_cap * b, Sense.LE, 0.0, f"{name}_x")
    model.add_constraint(y + y_cap * b, Sense.LE, y_cap, f"{name}_y")
    return b
