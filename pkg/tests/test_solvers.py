import itertools
import time

import numpy as np
import pytest
from scipy.optimize import linprog

from menroll.core.exceptions import ConfigurationError, SolverLimitError
from menroll.milp.model import MilpModel, Sense, SolveStatus, lin_sum
from menroll.milp.solvers import SolverOptions, check_solution, get_solver, solve


def random_milp(rng, n_bin, n_cont, n_rows):
    m = MilpModel("random")
    xs = m.add_vars("x", n_cont, 0.0, 10.0)
    bs = m.add_vars("b", n_bin, binary=True)
    cols = xs + bs
    for r in range(n_rows):
        coefs = rng.uniform(-1.0, 2.0, len(cols))
        m.add_constraint(lin_sum(float(c) * v for c, v in zip(coefs, cols)), Sense.LE, float(rng.uniform(1.0, 10.0)), f"row[{r}]")
    # binaries switch their paired continuous variable
    for i, b in enumerate(bs[: min(n_bin, n_cont)]):
        m.add_constraint(xs[i] - 10.0 * b, Sense.LE, 0.0, f"link[{i}]")
    m.add_objective(lin_sum(float(c) * v for c, v in zip(rng.uniform(-2.0, 1.0, len(cols)), cols)))
    return m


def brute_force(model):
    arrays = model.to_arrays()
    ints = np.flatnonzero(arrays.integrality)
    best = np.inf
    for assignment in itertools.product([0.0, 1.0], repeat=len(ints)):
        lb, ub = arrays.lb.copy(), arrays.ub.copy()
        lb[ints] = ub[ints] = assignment
        res = linprog(
            arrays.c,
            A_ub=arrays.a_ub if arrays.a_ub.shape[0] else None,
            b_ub=arrays.b_ub if arrays.a_ub.shape[0] else None,
            bounds=np.column_stack([lb, ub]),
            method="highs",
        )
        if res.status == 0:
            best = min(best, res.fun)
    return best + arrays.c0


@pytest.mark.parametrize("backend, min_binaries", [("highs", 1), ("branch-and-bound", 4)])
def test_random_milps_match_enumeration(backend, min_binaries):
    options = SolverOptions(backend=backend, mip_gap=0.0)
    started = time.monotonic()
    for trial in range(200):
        rng = np.random.default_rng(trial)
        model = random_milp(rng, int(rng.integers(min_binaries, 7)), int(rng.integers(1, 31)), int(rng.integers(1, 8)))
        sol = solve(model, options)
        assert sol.is_optimal
        check_solution(model, sol)
        expected = brute_force(model)
        assert sol.objective == pytest.approx(expected, rel=1e-6, abs=1e-7), trial
    assert time.monotonic() - started < 120.0


def test_twelve_binaries():
    rng = np.random.default_rng(1234)
    model = random_milp(rng, 12, 20, 6)
    highs = solve(model, SolverOptions(mip_gap=0.0))
    bnb = solve(model, SolverOptions(backend="branch-and-bound", mip_gap=0.0))
    assert highs.objective == pytest.approx(bnb.objective, rel=1e-6, abs=1e-7)


@pytest.mark.parametrize("backend", ["highs", "branch-and-bound"])
def test_infeasible_milp(backend):
    m = MilpModel("infeasible")
    b = m.add_vars("b", 2, binary=True)
    m.add_constraint(b[0] + b[1], Sense.GE, 3.0)
    assert solve(m, SolverOptions(backend=backend)).status is SolveStatus.INFEASIBLE


def test_node_limit_stops_branching():
    m = MilpModel("knapsack")
    take = m.add_vars("take", 3, binary=True)
    m.add_constraint(5 * take[0] + 7 * take[1] + 3 * take[2], Sense.LE, 9.0)
    m.add_objective(-10 * take[0] - 13 * take[1] - 7 * take[2])
    with pytest.raises(SolverLimitError) as exc:
        solve(m, SolverOptions(backend="branch-and-bound", node_limit=1))
    assert exc.value.status == "limit"
    assert exc.value.incumbent is None


def test_empty_model():
    sol = solve(MilpModel("empty"))
    assert sol.is_optimal
    assert sol.objective == 0.0


@pytest.mark.parametrize("kwargs", [
    {"backend": "cplex"},
    {"time_limit": 0.0},
    {"mip_gap": 1.0},
    {"node_limit": 0},
])
def test_invalid_options(kwargs):
    with pytest.raises(ConfigurationError):
        SolverOptions(**kwargs)


def test_get_solver_default_backend():
    assert get_solver().name == "highs"
