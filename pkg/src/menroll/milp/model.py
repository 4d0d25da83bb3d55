"""Solver-neutral mixed-integer linear program representation"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import sparse

from ..core.exceptions import ModelingError


class Sense(str, Enum):
    LE = "<="
    EQ = "=="
    GE = ">="


class SolveStatus(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


class Variable:
    """Handle to one model column"""

    __slots__ = ("model_id", "index", "name", "binary")
    __array_ufunc__ = None

    def __init__(self, model_id: int, index: int, name: str, binary: bool) -> None:
        self.model_id = model_id
        self.index = index
        self.name = name
        self.binary = binary

    def __repr__(self) -> str:
        return f"Variable({self.name})"

    def to_expr(self) -> "LinExpr":
        return LinExpr({self.index: 1.0}, 0.0, self.model_id)

    def __add__(self, other):
        return self.to_expr() + other

    __radd__ = __add__

    def __sub__(self, other):
        return self.to_expr() - other

    def __rsub__(self, other):
        return (-self.to_expr()) + other

    def __mul__(self, factor: float) -> "LinExpr":
        return self.to_expr() * factor

    __rmul__ = __mul__

    def __neg__(self) -> "LinExpr":
        return self.to_expr() * -1.0


class LinExpr:
    """Sparse affine expression ``sum(coef * var) + constant``"""

    __slots__ = ("terms", "constant", "model_id")
    __array_ufunc__ = None

    def __init__(self, terms: Optional[Dict[int, float]] = None, constant: float = 0.0, model_id: Optional[int] = None) -> None:
        self.terms: Dict[int, float] = dict(terms or {})
        self.constant = float(constant)
        self.model_id = model_id

    def __repr__(self) -> str:
        return f"LinExpr({len(self.terms)} terms, constant={self.constant})"

    def copy(self) -> "LinExpr":
        return LinExpr(self.terms, self.constant, self.model_id)

    def _merge_owner(self, other_id: Optional[int]) -> Optional[int]:
        if self.model_id is None:
            return other_id
        if other_id is not None and other_id != self.model_id:
            raise ModelingError("Expression mixes variables of different models")
        return self.model_id

    def add_term(self, var: Variable, coef: float) -> "LinExpr":
        """In-place accumulate ``coef * var``"""
        self.model_id = self._merge_owner(var.model_id)
        self.terms[var.index] = self.terms.get(var.index, 0.0) + float(coef)
        return self

    def __iadd__(self, other):
        if isinstance(other, Variable):
            return self.add_term(other, 1.0)
        if isinstance(other, LinExpr):
            self.model_id = self._merge_owner(other.model_id)
            for idx, coef in other.terms.items():
                self.terms[idx] = self.terms.get(idx, 0.0) + coef
            self.constant += other.constant
            return self
        self.constant += float(other)
        return self

    def __add__(self, other):
        out = self.copy()
        out += other
        return out

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1.0) * _as_expr(other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, factor: float) -> "LinExpr":
        factor = float(factor)
        return LinExpr({k: v * factor for k, v in self.terms.items()}, self.constant * factor, self.model_id)

    __rmul__ = __mul__

    def __neg__(self) -> "LinExpr":
        return self * -1.0


def _as_expr(value: Union[Variable, LinExpr, float]) -> LinExpr:
    if isinstance(value, LinExpr):
        return value
    if isinstance(value, Variable):
        return value.to_expr()
    return LinExpr(constant=float(value))


def lin_sum(items: Iterable[Union[Variable, LinExpr, float]]) -> LinExpr:
    """Sum of variables and expressions without quadratic copying"""
    total = LinExpr()
    for item in items:
        total += item
    return total


@dataclass
class Constraint:
    name: str
    terms: Dict[int, float]
    sense: Sense
    rhs: float


@dataclass
class MatrixForm:
    """Column-ordered arrays for array-based solver interfaces"""

    c: np.ndarray
    c0: float
    a_ub: sparse.csr_matrix
    b_ub: np.ndarray
    a_eq: sparse.csr_matrix
    b_eq: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    integrality: np.ndarray


class MilpModel:
    """Variables, linear constraints and a minimization objective"""

    _ids = itertools.count(1)

    def __init__(self, name: str = "model") -> None:
        self.model_id = next(MilpModel._ids)
        self.name = name
        self._vars: List[Variable] = []
        self._lb: List[float] = []
        self._ub: List[float] = []
        self._names: Dict[str, Variable] = {}
        self.constraints: List[Constraint] = []
        self.objective = LinExpr(model_id=self.model_id)

    # ------------------------------------------------------------------ vars
    @property
    def n_vars(self) -> int:
        return len(self._vars)

    @property
    def n_binaries(self) -> int:
        return sum(1 for v in self._vars if v.binary)

    @property
    def n_constraints(self) -> int:
        return len(self.constraints)

    @property
    def variables(self) -> Sequence[Variable]:
        return tuple(self._vars)

    def add_var(self, name: str, lb: float = 0.0, ub: float = np.inf, binary: bool = False) -> Variable:
        if name in self._names:
            raise ModelingError("Duplicate variable name", variable=name)
        lb, ub = float(lb), float(ub)
        if binary:
            lb, ub = max(lb, 0.0), min(ub, 1.0)
        if np.isnan(lb) or np.isnan(ub) or lb > ub:
            raise ModelingError(f"Bounds [{lb}, {ub}] are empty", variable=name)
        var = Variable(self.model_id, len(self._vars), name, binary)
        self._vars.append(var)
        self._lb.append(lb)
        self._ub.append(ub)
        self._names[name] = var
        return var

    def add_vars(self, prefix: str, n: int, lb: Union[float, Sequence[float]] = 0.0, ub: Union[float, Sequence[float]] = np.inf, binary: bool = False) -> List[Variable]:
        lbs = np.broadcast_to(np.asarray(lb, dtype=float), (n,))
        ubs = np.broadcast_to(np.asarray(ub, dtype=float), (n,))
        return [self.add_var(f"{prefix}[{t}]", lbs[t], ubs[t], binary) for t in range(n)]

    def var(self, name: str) -> Variable:
        try:
            return self._names[name]
        except KeyError:
            raise ModelingError("Unknown variable", variable=name) from None

    def bounds(self, var: Variable) -> Tuple[float, float]:
        self._check_owned(var)
        return self._lb[var.index], self._ub[var.index]

    def set_bounds(self, var: Variable, lb: float, ub: float) -> None:
        self._check_owned(var)
        if lb > ub:
            raise ModelingError(f"Bounds [{lb}, {ub}] are empty", variable=var.name)
        self._lb[var.index], self._ub[var.index] = float(lb), float(ub)

    def fix(self, var: Variable, value: float) -> None:
        self.set_bounds(var, value, value)

    def _check_owned(self, var: Variable) -> None:
        if var.model_id != self.model_id or var.index >= len(self._vars) or self._vars[var.index] is not var:
            raise ModelingError("Variable does not belong to this model", variable=getattr(var, "name", None))

    def expr_bounds(self, expr: Union[Variable, LinExpr]) -> Tuple[float, float]:
        """Interval of an expression implied by variable bounds"""
        expr = _as_expr(expr)
        lo = hi = expr.constant
        for idx, coef in expr.terms.items():
            if coef == 0.0:
                continue
            a, b = self._lb[idx] * coef, self._ub[idx] * coef
            lo += min(a, b)
            hi += max(a, b)
        return lo, hi

    # ----------------------------------------------------------- constraints
    def add_constraint(self, expr: Union[Variable, LinExpr], sense: Union[Sense, str], rhs: float = 0.0, name: str = "") -> Constraint:
        """Add ``expr <sense> rhs``; constants in ``expr`` move to the right side"""
        expr = _as_expr(expr)
        if expr.model_id not in (None, self.model_id):
            raise ModelingError("Constraint references another model's variables", details=name)
        for idx in expr.terms:
            if idx >= len(self._vars):
                raise ModelingError("Constraint references an undeclared variable", details=name)
        terms = {k: v for k, v in expr.terms.items() if v != 0.0}
        con = Constraint(name or f"c{len(self.constraints)}", terms, Sense(sense), float(rhs) - expr.constant)
        self.constraints.append(con)
        return con

    def add_objective(self, expr: Union[Variable, LinExpr, float]) -> None:
        expr = _as_expr(expr)
        if expr.model_id not in (None, self.model_id):
            raise ModelingError("Objective references another model's variables")
        self.objective += expr

    # ----------------------------------------------------------------- export
    def to_arrays(self) -> MatrixForm:
        n = self.n_vars
        c = np.zeros(n)
        for idx, coef in self.objective.terms.items():
            c[idx] += coef
        ub_rows, ub_cols, ub_vals, b_ub = [], [], [], []
        eq_rows, eq_cols, eq_vals, b_eq = [], [], [], []
        for con in self.constraints:
            if con.sense is Sense.EQ:
                row = len(b_eq)
                for idx, coef in con.terms.items():
                    eq_rows.append(row)
                    eq_cols.append(idx)
                    eq_vals.append(coef)
                b_eq.append(con.rhs)
            else:
                sign = 1.0 if con.sense is Sense.LE else -1.0
                row = len(b_ub)
                for idx, coef in con.terms.items():
                    ub_rows.append(row)
                    ub_cols.append(idx)
                    ub_vals.append(sign * coef)
                b_ub.append(sign * con.rhs)
        a_ub = sparse.csr_matrix((ub_vals, (ub_rows, ub_cols)), shape=(len(b_ub), n))
        a_eq = sparse.csr_matrix((eq_vals, (eq_rows, eq_cols)), shape=(len(b_eq), n))
        return MatrixForm(
            c=c,
            c0=self.objective.constant,
            a_ub=a_ub,
            b_ub=np.asarray(b_ub, dtype=float),
            a_eq=a_eq,
            b_eq=np.asarray(b_eq, dtype=float),
            lb=np.asarray(self._lb, dtype=float),
            ub=np.asarray(self._ub, dtype=float),
            integrality=np.array([1 if v.binary else 0 for v in self._vars], dtype=int),
        )

    def to_lp(self) -> str:
        """CPLEX LP text of the model"""

        def fmt(terms: Dict[int, float]) -> str:
            parts = []
            for idx, coef in terms.items():
                name = _lp_name(self._vars[idx].name)
                parts.append(f"{'-' if coef < 0 else '+'} {abs(coef):.12g} {name}")
            if not parts:
                return "0"
            text = " ".join(parts)
            return text[2:] if text.startswith("+ ") else text

        lines = [f"\\ {self.name}", "Minimize", f" obj: {fmt(self.objective.terms)}"]
        if self.objective.constant:
            lines.append(f" \\ constant {self.objective.constant:.12g}")
        lines.append("Subject To")
        for con in self.constraints:
            op = {"<=": "<=", "==": "=", ">=": ">="}[con.sense.value]
            lines.append(f" {_lp_name(con.name)}: {fmt(con.terms)} {op} {con.rhs:.12g}")
        lines.append("Bounds")
        for var, lb, ub in zip(self._vars, self._lb, self._ub):
            lo = "-inf" if np.isneginf(lb) else f"{lb:.12g}"
            hi = "+inf" if np.isposinf(ub) else f"{ub:.12g}"
            lines.append(f" {lo} <= {_lp_name(var.name)} <= {hi}")
        binaries = [_lp_name(v.name) for v in self._vars if v.binary]
        if binaries:
            lines.append("Binaries")
            lines.extend(f" {b}" for b in binaries)
        lines.append("End")
        return "\n".join(lines) + "\n"

    def write_lp(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_lp())


def _lp_name(name: str) -> str:
    return name.replace("[", "(").replace("]", ")").replace(" ", "_")


class Solution:
    """Solver outcome: status, objective and primal values"""

    def __init__(self, status: SolveStatus, objective: float = float("nan"), values: Optional[np.ndarray] = None, model: Optional[MilpModel] = None, nodes: int = 0) -> None:
        self.status = status
        self.objective = float(objective)
        self.values = None if values is None else np.asarray(values, dtype=float)
        self.model = model
        self.nodes = nodes

    def __repr__(self) -> str:
        return f"Solution(status={self.status.value}, objective={self.objective})"

    @property
    def is_optimal(self) -> bool:
        return self.status is SolveStatus.OPTIMAL

    def value(self, item: Union[Variable, LinExpr, float]) -> float:
        if self.values is None:
            raise ModelingError(f"No primal values for a {self.status.value} solution")
        expr = _as_expr(item)
        return float(expr.constant + sum(coef * self.values[idx] for idx, coef in expr.terms.items()))

    def __getitem__(self, item: Union[Variable, LinExpr]) -> float:
        return self.value(item)

    def array(self, items: Sequence[Union[Variable, LinExpr, float]]) -> np.ndarray:
        return np.array([self.value(it) for it in items], dtype=float)


def max_residual(model: MilpModel, values: np.ndarray) -> float:
    """Largest violation of constraints, bounds and integrality at ``values``"""
    x = np.asarray(values, dtype=float)
    worst = 0.0
    for con in model.constraints:
        lhs = sum(coef * x[idx] for idx, coef in con.terms.items())
        if con.sense is Sense.LE:
            worst = max(worst, lhs - con.rhs)
        elif con.sense is Sense.GE:
            worst = max(worst, con.rhs - lhs)
        else:
            worst = max(worst, abs(lhs - con.rhs))
    arrays = model.to_arrays()
    worst = max(worst, float(np.max(arrays.lb - x, initial=0.0)), float(np.max(x - arrays.ub, initial=0.0)))
    ints = arrays.integrality.astype(bool)
    if ints.any():
        worst = max(worst, float(np.max(np.abs(x[ints] - np.round(x[ints])))))
    return worst
