"""Solver-neutral linear programs (minimize c.v, v >= 0) and a HiGHS backend."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
NUMERIC_ERROR = "numeric_error"

_SENSES = ("=", ">=", "<=")
_TAG = {"=": "e", ">=": "g", "<=": "l"}


@dataclass
class _Block:
    rows: list = field(default_factory=list)
    cols: list = field(default_factory=list)
    vals: list = field(default_factory=list)
    rhs: list = field(default_factory=list)
    names: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rhs)


class LinearProgram:
    """Nonnegative variables, a linear objective to minimize, and rows of
    the form ``a.v (=|>=|<=) b`` stored sparsely."""

    def __init__(self, name: str = "lp"):
        self.name = name
        self.var_names: list[str] = []
        self._obj: dict[int, float] = {}
        self._blocks = {s: _Block() for s in _SENSES}

    @property
    def num_vars(self) -> int:
        return len(self.var_names)

    @property
    def num_constraints(self) -> int:
        return sum(len(b) for b in self._blocks.values())

    def add_variables(self, names: Sequence[str]) -> np.ndarray:
        start = len(self.var_names)
        self.var_names.extend(names)
        return np.arange(start, len(self.var_names))

    def add_objective(self, idx, coef) -> None:
        """Add ``coef`` to the objective coefficients of variables ``idx``."""
        for i, c in zip(np.atleast_1d(idx), np.broadcast_to(coef, np.shape(np.atleast_1d(idx)))):
            self._obj[int(i)] = self._obj.get(int(i), 0.0) + float(c)

    def objective_vector(self) -> np.ndarray:
        c = np.zeros(self.num_vars)
        for i, v in self._obj.items():
            c[i] = v
        return c

    def set_objective_vector(self, c: np.ndarray) -> None:
        self._obj = {int(i): float(c[i]) for i in np.flatnonzero(c)}

    def add_constraint(self, idx, coef, sense: str, rhs: float, name: str = "") -> int:
        if sense not in _SENSES:
            raise ValueError(f"unknown relation {sense!r}")
        blk = self._blocks[sense]
        row = len(blk)
        idx = np.atleast_1d(np.asarray(idx, dtype=np.int64))
        coef = np.broadcast_to(np.asarray(coef, dtype=float), idx.shape)
        if len(idx) and (idx.min() < 0 or idx.max() >= self.num_vars):
            raise IndexError("constraint references an undeclared variable")
        blk.rows.append(np.full(len(idx), row, dtype=np.int64))
        blk.cols.append(idx)
        blk.vals.append(coef.astype(float))
        blk.rhs.append(float(rhs))
        blk.names.append(name or f"{_TAG[sense]}{row}")
        return row

    def add_constraints(self, rows, cols, vals, sense: str, rhs: Sequence[float], names: Sequence[str] | None = None) -> None:
        """Bulk form: COO triplets with row ids local to this call."""
        if sense not in _SENSES:
            raise ValueError(f"unknown relation {sense!r}")
        blk = self._blocks[sense]
        base = len(blk)
        cols = np.asarray(cols, dtype=np.int64)
        if len(cols) and (cols.min() < 0 or cols.max() >= self.num_vars):
            raise IndexError("constraint references an undeclared variable")
        blk.rows.append(np.asarray(rows, dtype=np.int64) + base)
        blk.cols.append(cols)
        blk.vals.append(np.asarray(vals, dtype=float))
        blk.rhs.extend(float(b) for b in rhs)
        blk.names.extend(names if names is not None else [f"{_TAG[sense]}{base + k}" for k in range(len(rhs))])

    def matrix(self, sense: str) -> tuple[sp.csr_matrix, np.ndarray]:
        blk = self._blocks[sense]
        n = len(blk)
        if blk.rows:
            r = np.concatenate(blk.rows)
            c = np.concatenate(blk.cols)
            v = np.concatenate(blk.vals)
        else:
            r = c = np.zeros(0, dtype=np.int64)
            v = np.zeros(0)
        A = sp.csr_matrix((v, (r, c)), shape=(n, self.num_vars))
        A.sum_duplicates()
        return A, np.array(blk.rhs, dtype=float)

    def constraint_names(self, sense: str) -> list[str]:
        return list(self._blocks[sense].names)

    def scaled(self, factor: float) -> "LinearProgram":
        """Copy with the objective multiplied by ``factor``."""
        out = LinearProgram(self.name)
        out.var_names = list(self.var_names)
        out._obj = {i: v * factor for i, v in self._obj.items()}
        for s in _SENSES:
            src, dst = self._blocks[s], out._blocks[s]
            dst.rows, dst.cols, dst.vals = list(src.rows), list(src.cols), list(src.vals)
            dst.rhs, dst.names = list(src.rhs), list(src.names)
        return out


@dataclass
class LpSolution:
    status: str
    objective: float = float("nan")
    x: np.ndarray | None = None
    max_violation: float = float("nan")
    duality_gap: float = float("nan")
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


def replay(lp: LinearProgram, x: np.ndarray) -> float:
    """Largest constraint or sign violation of ``x``."""
    worst = float(max(0.0, -x.min())) if len(x) else 0.0
    for sense in _SENSES:
        A, b = lp.matrix(sense)
        if A.shape[0] == 0:
            continue
        r = A @ x - b
        if sense == "=":
            worst = max(worst, float(np.abs(r).max()))
        elif sense == ">=":
            worst = max(worst, float(max(0.0, -r.min())))
        else:
            worst = max(worst, float(max(0.0, r.max())))
    return worst


def solve(lp: LinearProgram, tol: float = 1e-6, nonneg_slack: float = 1e-9) -> LpSolution:
    """Solve with HiGHS and check the answer by replaying the constraints."""
    c = lp.objective_vector()
    A_eq, b_eq = lp.matrix("=")
    A_ge, b_ge = lp.matrix(">=")
    A_le, b_le = lp.matrix("<=")
    A_ub = sp.vstack([-A_ge, A_le], format="csr")
    b_ub = np.concatenate([-b_ge, b_le])
    if lp.num_vars == 0:
        bad = (len(b_eq) and np.abs(b_eq).max() > tol) or (len(b_ub) and b_ub.min() < -tol)
        return LpSolution(INFEASIBLE if bad else OPTIMAL, 0.0, np.zeros(0), 0.0, 0.0)
    res = linprog(
        c,
        A_ub=A_ub if A_ub.shape[0] else None,
        b_ub=b_ub if A_ub.shape[0] else None,
        A_eq=A_eq if A_eq.shape[0] else None,
        b_eq=b_eq if A_eq.shape[0] else None,
        bounds=(0, None),
        method="highs",
    )
    if res.status == 2:
        return LpSolution(INFEASIBLE, message=res.message)
    if res.status == 3:
        return LpSolution(UNBOUNDED, message=res.message)
    if res.status != 0 or res.x is None:
        return LpSolution(NUMERIC_ERROR, message=res.message)
    x = np.asarray(res.x, dtype=float)
    if x.min() >= -tol:
        # HiGHS leaves roundoff-size negatives; clip them and judge the clipped point
        x = np.maximum(x, 0.0)
    viol = replay(lp, x)
    gap = float("nan")
    try:
        dual = 0.0
        if A_eq.shape[0]:
            dual += float(b_eq @ res.eqlin.marginals)
        if A_ub.shape[0]:
            dual += float(b_ub @ res.ineqlin.marginals)
        gap = abs(float(res.fun) - dual)
    except (AttributeError, TypeError):
        pass
    scale = 1.0 + abs(float(res.fun))
    if viol > tol or x.min() < -nonneg_slack or (gap == gap and gap > tol * scale):
        return LpSolution(NUMERIC_ERROR, float(res.fun), x, viol, gap, "solution failed the replay check")
    return LpSolution(OPTIMAL, float(res.fun), np.maximum(x, 0.0), viol, gap, res.message)


# --- LP text format -----------------------------------------------------------

_BAD = re.compile(r"[^A-Za-z0-9_.!\"#$%&()/,;?@`'{}|~]")


def _safe(name: str) -> str:
    name = _BAD.sub("_", name)
    if not name or name[0].isdigit() or name[0] in ".eE":
        name = "v" + name
    return name


def _terms(idx, vals, names) -> str:
    parts = []
    for i, v in zip(idx, vals):
        if v == 0:
            continue
        sign = "-" if v < 0 else "+"
        parts.append(f"{sign} {abs(v):.17g} {names[i]}")
    if not parts:
        return "0 " + names[0] if names else "0"
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def to_lp_text(lp: LinearProgram) -> str:
    """CPLEX LP format rendering for external cross-checks."""
    names = [_safe(n) for n in lp.var_names]
    c = lp.objective_vector()
    out = [f"\\ {lp.name}", "Minimize", " obj: " + _terms(np.flatnonzero(c), c[np.flatnonzero(c)], names), "Subject To"]
    for sense, op in (("=", "="), (">=", ">="), ("<=", "<=")):
        A, b = lp.matrix(sense)
        cn = lp.constraint_names(sense)
        for k in range(A.shape[0]):
            row = A.getrow(k)
            out.append(f" {_safe(cn[k])}: {_terms(row.indices, row.data, names)} {op} {b[k]:.17g}")
    out.append("Bounds")
    out.extend(f" {n} >= 0" for n in names)
    out.append("End")
    return "\n".join(out) + "\n"
