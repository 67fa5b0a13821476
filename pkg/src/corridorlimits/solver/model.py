"""Linear expressions, linear programs and solve results."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

INF = math.inf

SENSES = ("<=", ">=", "==")


class LinExpr:
    """Sparse affine expression ``sum(coef * x[i]) + const``."""

    __slots__ = ("terms", "const")

    def __init__(self, terms=None, const=0.0):
        self.terms: dict[int, float] = dict(terms) if terms else {}
        self.const = float(const)

    @classmethod
    def of(cls, value) -> "LinExpr":
        if isinstance(value, LinExpr):
            return value
        return cls(const=float(value))

    def copy(self) -> "LinExpr":
        return LinExpr(self.terms, self.const)

    def __iadd__(self, other):
        if isinstance(other, LinExpr):
            for i, a in other.terms.items():
                self.terms[i] = self.terms.get(i, 0.0) + a
            self.const += other.const
        else:
            self.const += float(other)
        return self

    def __add__(self, other):
        out = self.copy()
        out += other
        return out

    __radd__ = __add__

    def __neg__(self):
        return LinExpr({i: -a for i, a in self.terms.items()}, -self.const)

    def __sub__(self, other):
        return self + (-LinExpr.of(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, k):
        k = float(k)
        return LinExpr({i: a * k for i, a in self.terms.items()}, self.const * k)

    __rmul__ = __mul__

    def add_term(self, index: int, coef: float) -> None:
        self.terms[index] = self.terms.get(index, 0.0) + coef

    def value(self, x) -> float:
        return self.const + sum(a * x[i] for i, a in self.terms.items())

    def __repr__(self):
        body = " + ".join(f"{a:g}*x{i}" for i, a in sorted(self.terms.items()))
        return f"LinExpr({body or '0'} + {self.const:g})"


class Var(LinExpr):
    """A single decision variable; behaves as the expression ``1.0 * x[index]``."""

    __slots__ = ("index",)

    def __init__(self, index: int):
        super().__init__({index: 1.0})
        self.index = index


def quicksum(items) -> LinExpr:
    out = LinExpr()
    for item in items:
        out += item
    return out


@dataclass
class Row:
    terms: dict[int, float]
    sense: str
    rhs: float
    name: str


class LinearProgram:
    """Minimization program with bounded continuous and binary variables.

    Variables are addressed by integer index (returned wrapped in :class:`Var`).
    Constraints are stored as sparse rows; an expression's constant is moved
    to the right-hand side when the row is added.
    """

    def __init__(self, name: str = "lp"):
        self.name = name
        self.var_names: list[str] = []
        self.lo: list[float] = []
        self.hi: list[float] = []
        self.binary: list[bool] = []
        self.rows: list[Row] = []
        self.objective = LinExpr()
        self._name_index: dict[str, int] = {}

    @property
    def num_vars(self) -> int:
        return len(self.var_names)

    @property
    def num_rows(self) -> int:
        return len(self.rows)

    @property
    def num_binaries(self) -> int:
        return sum(self.binary)

    def add_var(self, name: str | None = None, lo: float = 0.0, hi: float = INF,
                binary: bool = False) -> Var:
        index = len(self.var_names)
        if name is None:
            name = f"x{index}"
        if name in self._name_index:
            raise ValueError(f"duplicate variable name {name!r}")
        if binary:
            lo, hi = max(0.0, lo), min(1.0, hi)
        if lo > hi:
            raise ValueError(f"variable {name!r}: lower bound {lo} exceeds upper bound {hi}")
        self.var_names.append(name)
        self.lo.append(float(lo))
        self.hi.append(float(hi))
        self.binary.append(bool(binary))
        self._name_index[name] = index
        return Var(index)

    def var(self, name: str) -> Var:
        return Var(self._name_index[name])

    def add_constraint(self, expr, sense: str, rhs=0.0, name: str | None = None) -> int:
        if sense not in SENSES:
            raise ValueError(f"unknown constraint sense {sense!r}")
        expr = LinExpr.of(expr) - LinExpr.of(rhs)
        terms = {i: a for i, a in expr.terms.items() if a != 0.0}
        for i in terms:
            if not 0 <= i < self.num_vars:
                raise IndexError(f"constraint references unknown variable {i}")
        if name is None:
            name = f"c{len(self.rows)}"
        self.rows.append(Row(terms, sense, -expr.const, name))
        return len(self.rows) - 1

    def set_objective(self, expr) -> None:
        self.objective = LinExpr.of(expr).copy()

    def set_bounds(self, var, lo: float | None = None, hi: float | None = None) -> None:
        i = var.index if isinstance(var, Var) else int(var)
        if lo is not None:
            self.lo[i] = float(lo)
        if hi is not None:
            self.hi[i] = float(hi)

    def arrays(self):
        """Return ``(c, A, row_lo, row_hi, lo, hi, is_binary)`` with ``A`` in CSR form."""
        n, m = self.num_vars, self.num_rows
        c = np.zeros(n)
        for i, a in self.objective.terms.items():
            c[i] += a
        data, ri, ci = [], [], []
        row_lo = np.empty(m)
        row_hi = np.empty(m)
        for k, row in enumerate(self.rows):
            for i, a in row.terms.items():
                data.append(a)
                ri.append(k)
                ci.append(i)
            row_lo[k] = row.rhs if row.sense in (">=", "==") else -INF
            row_hi[k] = row.rhs if row.sense in ("<=", "==") else INF
        A = sp.csr_matrix((data, (ri, ci)), shape=(m, n))
        return (c, A, row_lo, row_hi, np.array(self.lo, dtype=float),
                np.array(self.hi, dtype=float), np.array(self.binary, dtype=bool))

    def max_violation(self, x) -> float:
        """Largest bound or row violation of point ``x`` (absolute, MW-scale units)."""
        _, A, row_lo, row_hi, lo, hi, _ = self.arrays()
        x = np.asarray(x, dtype=float)
        ax = A @ x
        v = [0.0]
        if len(x):
            v.append(float(np.max(np.maximum(lo - x, 0.0))))
            v.append(float(np.max(np.maximum(x - hi, 0.0))))
        if len(ax):
            v.append(float(np.max(np.maximum(row_lo - ax, 0.0))))
            v.append(float(np.max(np.maximum(ax - row_hi, 0.0))))
        return max(v)

    def relaxed(self) -> "LinearProgram":
        """Copy with every binary treated as a continuous variable in [0, 1]."""
        out = self.copy()
        out.binary = [False] * self.num_vars
        return out

    def copy(self) -> "LinearProgram":
        out = LinearProgram(self.name)
        out.var_names = list(self.var_names)
        out.lo = list(self.lo)
        out.hi = list(self.hi)
        out.binary = list(self.binary)
        out.rows = [Row(dict(r.terms), r.sense, r.rhs, r.name) for r in self.rows]
        out.objective = self.objective.copy()
        out._name_index = dict(self._name_index)
        return out


@dataclass
class SolveResult:
    status: str
    objective: float = math.nan
    x: np.ndarray | None = None
    mip_gap: float = math.nan
    best_bound: float = math.nan
    wall_time: float = 0.0
    nodes: int = 0
    iterations: int = 0
    log: list[str] = field(default_factory=list)
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status in ("optimal", "gap_limit")

    @property
    def has_solution(self) -> bool:
        return self.x is not None

    def value(self, expr) -> float:
        if self.x is None:
            raise ValueError(f"no solution available (status {self.status})")
        if isinstance(expr, (int, np.integer)):
            return float(self.x[expr])
        return LinExpr.of(expr).value(self.x)
