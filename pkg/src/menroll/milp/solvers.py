"""Solver adapters

Two backends share one contract, ``solve(model, options) -> Solution``:

* ``highs``: the HiGHS MILP solver bundled with SciPy
* ``branch-and-bound``: a self-contained depth-first branch and bound over
  dual-simplex LP relaxations (``scipy.optimize.linprog``)
"""
from __future__ import annotations

import math
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple, Type

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, linprog, milp

from ..core.exceptions import ConfigurationError, SolverError, SolverLimitError
from ..core.logging_utils import get_logger
from .constants import (
    DEFAULT_BACKEND,
    DEFAULT_MIP_GAP,
    DEFAULT_NODE_LIMIT,
    FEASIBILITY_TOLERANCE,
    INTEGRALITY_TOLERANCE,
)
from .model import MatrixForm, MilpModel, Solution, SolveStatus, max_residual

logger = get_logger(__name__)


@dataclass(frozen=True)
class SolverOptions:
    backend: str = DEFAULT_BACKEND
    time_limit: Optional[float] = None
    mip_gap: float = DEFAULT_MIP_GAP
    node_limit: int = DEFAULT_NODE_LIMIT

    def __post_init__(self) -> None:
        if self.backend not in SOLVERS:
            raise ConfigurationError(f"Unknown solver backend '{self.backend}'", setting="solver.backend")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ConfigurationError("Time limit must be positive", setting="solver.time_limit")
        if not 0 <= self.mip_gap < 1:
            raise ConfigurationError("MIP gap must lie in [0, 1)", setting="solver.mip_gap")
        if self.node_limit <= 0:
            raise ConfigurationError("Node limit must be positive", setting="solver.node_limit")


class Solver(ABC):
    """Backend interface"""

    name = "abstract"

    def __init__(self, options: SolverOptions) -> None:
        self.options = options

    @abstractmethod
    def solve(self, model: MilpModel) -> Solution:
        """Return the optimum of ``model`` or its Infeasible/Unbounded status"""


class HighsSolver(Solver):
    """HiGHS through :func:`scipy.optimize.milp`"""

    name = "highs"

    def solve(self, model: MilpModel) -> Solution:
        arrays = model.to_arrays()
        if model.n_vars == 0:
            return Solution(SolveStatus.OPTIMAL, arrays.c0, np.zeros(0), model)
        constraints = []
        if arrays.a_ub.shape[0]:
            constraints.append(LinearConstraint(arrays.a_ub, -np.inf, arrays.b_ub))
        if arrays.a_eq.shape[0]:
            constraints.append(LinearConstraint(arrays.a_eq, arrays.b_eq, arrays.b_eq))
        options: Dict[str, object] = {"disp": False, "mip_rel_gap": self.options.mip_gap}
        if self.options.time_limit is not None:
            options["time_limit"] = float(self.options.time_limit)
        if arrays.integrality.any():
            options["node_limit"] = int(self.options.node_limit)

        res = milp(
            arrays.c,
            constraints=constraints,
            integrality=arrays.integrality,
            bounds=Bounds(arrays.lb, arrays.ub),
            options=options,
        )
        if res.status == 0:
            return Solution(SolveStatus.OPTIMAL, float(res.fun) + arrays.c0, res.x, model)
        if res.status == 2:
            return Solution(SolveStatus.INFEASIBLE, model=model)
        if res.status == 3:
            return Solution(SolveStatus.UNBOUNDED, model=model)
        if res.status == 1:
            incumbent = None
            if res.x is not None:
                incumbent = Solution(SolveStatus.OPTIMAL, float(arrays.c @ res.x) + arrays.c0, res.x, model)
            raise SolverLimitError(details=res.message, incumbent=incumbent)
        raise SolverError("HiGHS failed", details=res.message, status=str(res.status))


class BranchAndBoundSolver(Solver):
    """Depth-first branch and bound on the most fractional binary"""

    name = "branch-and-bound"

    def _relax(self, arrays: MatrixForm, lb: np.ndarray, ub: np.ndarray):
        return linprog(
            arrays.c,
            A_ub=arrays.a_ub if arrays.a_ub.shape[0] else None,
            b_ub=arrays.b_ub if arrays.a_ub.shape[0] else None,
            A_eq=arrays.a_eq if arrays.a_eq.shape[0] else None,
            b_eq=arrays.b_eq if arrays.a_eq.shape[0] else None,
            bounds=np.column_stack([lb, ub]),
            method="highs-ds",
        )

    def solve(self, model: MilpModel) -> Solution:
        arrays = model.to_arrays()
        if model.n_vars == 0:
            return Solution(SolveStatus.OPTIMAL, arrays.c0, np.zeros(0), model)
        ints = np.flatnonzero(arrays.integrality)
        deadline = None if self.options.time_limit is None else time.monotonic() + self.options.time_limit

        best_x: Optional[np.ndarray] = None
        best_obj = math.inf
        stack: List[Tuple[np.ndarray, np.ndarray]] = [(arrays.lb.copy(), arrays.ub.copy())]
        nodes = 0
        root = True
        while stack:
            if nodes >= self.options.node_limit or (deadline is not None and time.monotonic() > deadline):
                incumbent = None
                if best_x is not None:
                    incumbent = Solution(SolveStatus.OPTIMAL, best_obj + arrays.c0, best_x, model, nodes)
                raise SolverLimitError(details=f"{nodes} nodes explored", incumbent=incumbent)
            lb, ub = stack.pop()
            nodes += 1
            res = self._relax(arrays, lb, ub)
            if res.status == 2:
                root = False
                continue
            if res.status == 3:
                if root:
                    return Solution(SolveStatus.UNBOUNDED, model=model, nodes=nodes)
                continue
            if res.status != 0:
                raise SolverError("LP relaxation failed", details=res.message, status=str(res.status))
            root = False

            if best_x is not None and res.fun >= best_obj - self.options.mip_gap * max(1.0, abs(best_obj)):
                continue
            x = res.x
            frac = np.abs(x[ints] - np.round(x[ints])) if ints.size else np.zeros(0)
            if not frac.size or frac.max() <= INTEGRALITY_TOLERANCE:
                x = x.copy()
                x[ints] = np.round(x[ints])
                best_x, best_obj = x, float(arrays.c @ x)
                continue

            j = int(ints[int(np.argmax(frac))])
            down_ub = ub.copy()
            down_ub[j] = math.floor(x[j])
            up_lb = lb.copy()
            up_lb[j] = math.ceil(x[j])
            # LIFO: the branch nearer the relaxed value is explored first
            if x[j] - math.floor(x[j]) >= 0.5:
                stack.append((lb, down_ub))
                stack.append((up_lb, ub))
            else:
                stack.append((up_lb, ub))
                stack.append((lb, down_ub))

        if best_x is None:
            return Solution(SolveStatus.INFEASIBLE, model=model, nodes=nodes)
        return Solution(SolveStatus.OPTIMAL, best_obj + arrays.c0, best_x, model, nodes)


SOLVERS: Dict[str, Type[Solver]] = {
    HighsSolver.name: HighsSolver,
    BranchAndBoundSolver.name: BranchAndBoundSolver,
}


def get_solver(options: Optional[SolverOptions] = None) -> Solver:
    options = options or SolverOptions()
    return SOLVERS[options.backend](options)


def solve(model: MilpModel, options: Optional[SolverOptions] = None) -> Solution:
    """Solve ``model`` with the configured backend"""
    solver = get_solver(options)
    started = time.monotonic()
    solution = solver.solve(model)
    logger.debug(
        f"{model.name}: {solver.name} returned {solution.status.value} "
        f"({model.n_vars} vars, {model.n_binaries} binaries, {model.n_constraints} rows) "
        f"in {time.monotonic() - started:.3f}s"
    )
    return solution


def check_solution(model: MilpModel, solution: Solution, tolerance: float = FEASIBILITY_TOLERANCE) -> float:
    """Independent residual check; returns the max violation

    Raises:
        SolverError: if an optimal solution violates the model beyond ``tolerance``
    """
    if not solution.is_optimal or solution.values is None:
        return 0.0
    residual = max_residual(model, solution.values)
    if residual > tolerance:
        raise SolverError(
            f"Solution violates {model.name} by {residual:.3e}",
            status=solution.status.value,
        )
    return residual
