import itertools

import numpy as np
import pytest

from menroll.core.exceptions import ModelingError
from menroll.milp.linearize import add_abs, add_exclusive_pair, add_pwl
from menroll.milp.model import MilpModel, Sense, lin_sum
from menroll.milp.solvers import SolverOptions, solve

BACKENDS = ["highs", "branch-and-bound"]


@pytest.mark.parametrize("backend", BACKENDS)
def test_abs_of_fixed_value(backend):
    m = MilpModel("abs")
    x = m.add_var("x", -10.0, 10.0)
    m.fix(x, -3.5)
    a = add_abs(m, x)
    m.add_objective(a)
    sol = solve(m, SolverOptions(backend=backend))
    assert sol[a] == pytest.approx(3.5)


def test_abs_big_m_too_small():
    m = MilpModel("abs")
    x = m.add_var("x", -10.0, 10.0)
    with pytest.raises(ModelingError):
        add_abs(m, x, big_m=5.0)


CURVE = [(0.0, 0.0), (10.0, 50.0), (20.0, 60.0), (30.0, 120.0), (40.0, 125.0)]


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("x_value", [5.0, 15.0, 27.5, 40.0])
@pytest.mark.parametrize("direction", [1.0, -1.0])
def test_pwl_matches_interpolation(backend, x_value, direction):
    m = MilpModel("pwl")
    x = m.add_var("x", 0.0, 40.0)
    m.fix(x, x_value)
    cost = add_pwl(m, x, CURVE)
    m.add_objective(direction * cost)
    sol = solve(m, SolverOptions(backend=backend))
    expected = np.interp(x_value, [p[0] for p in CURVE], [p[1] for p in CURVE])
    assert sol[cost] == pytest.approx(expected, abs=1e-6)


def test_pwl_with_commitment_switched_off():
    m = MilpModel("pwl")
    x = m.add_var("x", 0.0, 40.0)
    on = m.add_var("on", binary=True)
    m.fix(on, 0.0)
    cost = add_pwl(m, x, [(10.0, 30.0), (40.0, 90.0)], active=on)
    m.add_objective(-x)
    sol = solve(m)
    assert sol[x] == pytest.approx(0.0)
    assert sol[cost] == pytest.approx(0.0)


@pytest.mark.parametrize("on_value, x_value, cost_value", [(1.0, 25.0, 40.0), (0.0, 0.0, 0.0)])
def test_pwl_single_point(on_value, x_value, cost_value):
    m = MilpModel("pwl")
    x = m.add_var("x", 0.0, 40.0)
    on = m.add_var("on", binary=True)
    m.fix(on, on_value)
    cost = add_pwl(m, x, [(25.0, 40.0)], active=on)
    m.add_objective(cost)
    sol = solve(m)
    assert sol[x] == pytest.approx(x_value)
    assert sol[cost] == pytest.approx(cost_value)


def test_pwl_single_point_without_commitment():
    m = MilpModel("pwl")
    x = m.add_var("x", 0.0, 40.0)
    cost = add_pwl(m, x, [(12.0, 7.0)])
    m.add_objective(-x)
    sol = solve(m)
    assert sol[x] == pytest.approx(12.0)
    assert sol[cost] == pytest.approx(7.0)


@pytest.mark.parametrize("breakpoints", [[], [(0.0, 0.0), (0.0, 1.0)], [(5.0, 0.0), (1.0, 2.0)]])
def test_pwl_rejects_bad_breakpoints(breakpoints):
    m = MilpModel()
    x = m.add_var("x")
    with pytest.raises(ModelingError):
        add_pwl(m, x, breakpoints)


@pytest.mark.parametrize("backend", BACKENDS)
def test_exclusive_pair(backend):
    m = MilpModel("pair")
    x = m.add_var("x", 0.0, 5.0)
    y = m.add_var("y", 0.0, 3.0)
    add_exclusive_pair(m, x, y)
    m.add_objective(-x - y)
    sol = solve(m, SolverOptions(backend=backend))
    assert sol.objective == pytest.approx(-5.0)
    assert sol[x] * sol[y] == pytest.approx(0.0, abs=1e-9)


def test_exclusive_pair_needs_finite_caps():
    m = MilpModel()
    x, y = m.add_var("x"), m.add_var("y", 0.0, 1.0)
    with pytest.raises(ModelingError):
        add_exclusive_pair(m, x, y)


@pytest.mark.parametrize("backend", BACKENDS)
def test_knapsack_matches_enumeration(backend):
    values = [10.0, 13.0, 7.0, 8.0, 9.0, 4.0]
    weights = [5.0, 7.0, 3.0, 4.0, 6.0, 2.0]
    capacity = 15.0
    m = MilpModel("knapsack")
    take = m.add_vars("take", 6, binary=True)
    m.add_constraint(lin_sum(w * t for w, t in zip(weights, take)), Sense.LE, capacity)
    m.add_objective(lin_sum(-v * t for v, t in zip(values, take)))
    sol = solve(m, SolverOptions(backend=backend))

    best = max(
        sum(v for v, pick in zip(values, subset) if pick)
        for subset in itertools.product([0, 1], repeat=6)
        if sum(w for w, pick in zip(weights, subset) if pick) <= capacity
    )
    assert -sol.objective == pytest.approx(best)
