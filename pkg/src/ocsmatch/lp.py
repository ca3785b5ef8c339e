"""Factor-revealing linear programs and a small dense simplex solver."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DomainError
from .recurrences import RecurrenceTable, eval_g, optimal_p
from .tables import GainTable, UnweightedDualTable

PIVOT_TOL = 1e-9
CERT_TOL = 1e-8


@dataclass
class Constraint:
    coeffs: dict[str, float]
    relation: str
    rhs: float
    label: str = ""

    def lhs(self, values: Mapping[str, float]) -> float:
        return math.fsum(c * values[name] for name, c in self.coeffs.items())

    def violation(self, values: Mapping[str, float]) -> float:
        """Positive amount by which ``values`` breaks this constraint (<= 0 when satisfied)."""
        lhs = self.lhs(values)
        if self.relation == "<=":
            return lhs - self.rhs
        if self.relation == ">=":
            return self.rhs - lhs
        return abs(lhs - self.rhs)


@dataclass
class LpModel:
    """``maximize objective . x`` subject to the constraints and ``x >= 0``."""

    names: list[str] = field(default_factory=list)
    objective: dict[str, float] = field(default_factory=dict)
    constraints: list[Constraint] = field(default_factory=list)

    def var(self, name: str) -> str:
        if name in self.names:
            raise ValueError(f"duplicate variable {name}")
        self.names.append(name)
        return name

    def add(self, coeffs: Mapping[str, float], relation: str, rhs: float, label: str = "") -> None:
        if relation not in ("<=", ">=", "=="):
            raise ValueError(f"bad relation {relation!r}")
        unknown = set(coeffs) - set(self.names)
        if unknown:
            raise ValueError(f"unknown variables {sorted(unknown)}")
        if not all(math.isfinite(c) for c in coeffs.values()) or not math.isfinite(rhs):
            raise ValueError(f"non-finite coefficient in constraint {label!r}")
        self.constraints.append(Constraint(dict(coeffs), relation, float(rhs), label))

    def to_text(self) -> str:
        """Plain LP-style listing."""
        def expr(coeffs):
            terms = [f"{'+' if c >= 0 else '-'} {abs(c):.10g} {n}" for n, c in coeffs.items() if c != 0]
            text = " ".join(terms) or "0"
            return text[2:] if text.startswith("+ ") else text

        lines = ["maximize", f"  obj: {expr(self.objective)}", "subject to"]
        for n, c in enumerate(self.constraints):
            lines.append(f"  {c.label or f'c{n}'}: {expr(c.coeffs)} {c.relation} {c.rhs:.12g}")
        lines.append("bounds")
        lines += [f"  {name} >= 0" for name in self.names]
        lines.append("end")
        return "\n".join(lines) + "\n"


@dataclass
class LpSolution:
    status: str
    objective: float = math.nan
    values: dict[str, float] = field(default_factory=dict)
    iterations: int = 0

    def to_text(self) -> str:
        lines = [f"status: {self.status}", f"objective: {self.objective:.10f}"]
        lines += [f"  {name} = {val:.10f}" for name, val in self.values.items()]
        return "\n".join(lines) + "\n"


class _Tableau:
    def __init__(self, A: np.ndarray, b: np.ndarray, basis: list[int]):
        self.T = np.hstack([A, b[:, None]])
        self.basis = basis
        self.iterations = 0

    def pivot(self, row: int, col: int) -> None:
        T = self.T
        T[row] /= T[row, col]
        for r in range(T.shape[0]):
            if r != row and T[r, col] != 0.0:
                T[r] -= T[r, col] * T[row]
        self.basis[row] = col
        self.iterations += 1

    def optimize(self, cost: np.ndarray, allowed: np.ndarray) -> str:
        """Maximize ``cost . x`` with Bland's rule; returns "optimal" or "unbounded"."""
        T = self.T
        while True:
            reduced = cost - cost[self.basis] @ T[:, :-1]
            entering = np.flatnonzero(allowed & (reduced > PIVOT_TOL))
            if entering.size == 0:
                return "optimal"
            col = entering[0]
            column = T[:, col]
            rows = np.flatnonzero(column > PIVOT_TOL)
            if rows.size == 0:
                return "unbounded"
            ratios = T[rows, -1] / column[rows]
            best = ratios.min()
            ties = rows[ratios <= best + PIVOT_TOL * max(1.0, abs(best))]
            row = min(ties, key=lambda r: self.basis[r])
            self.pivot(row, col)


def solve(model: LpModel) -> LpSolution:
    """Two-phase dense tableau simplex with Bland's anti-cycling rule."""
    n = len(model.names)
    index = {name: i for i, name in enumerate(model.names)}
    rows, rhs, rels = [], [], []
    for c in model.constraints:
        row = np.zeros(n)
        for name, coef in c.coeffs.items():
            row[index[name]] += coef
        rel, b = c.relation, c.rhs
        if b < 0:
            row, b = -row, -b
            rel = {"<=": ">=", ">=": "<=", "==": "=="}[rel]
        rows.append(row)
        rhs.append(b)
        rels.append(rel)

    m = len(rows)
    n_slack = sum(r != "==" for r in rels)
    n_art = sum(r != "<=" for r in rels)
    width = n + n_slack + n_art
    A = np.zeros((m, width))
    basis = []
    s, a = n, n + n_slack
    for r, (row, rel) in enumerate(zip(rows, rels)):
        A[r, :n] = row
        if rel == "<=":
            A[r, s] = 1.0
            basis.append(s)
            s += 1
        else:
            if rel == ">=":
                A[r, s] = -1.0
                s += 1
            A[r, a] = 1.0
            basis.append(a)
            a += 1
    tab = _Tableau(A, np.array(rhs, dtype=float), basis)
    artificial = np.zeros(width, dtype=bool)
    artificial[n + n_slack:] = True

    if n_art:
        tab.optimize(-artificial.astype(float), np.ones(width, dtype=bool))
        if tab.T[:, -1] @ artificial[tab.basis] > 1e-7:
            return LpSolution("infeasible", iterations=tab.iterations)
        for r in range(m):
            if artificial[tab.basis[r]]:
                candidates = np.flatnonzero(~artificial & (np.abs(tab.T[r, :-1]) > PIVOT_TOL))
                if candidates.size:
                    tab.pivot(r, candidates[0])
        keep = [r for r in range(m) if not artificial[tab.basis[r]]]
        tab.T = tab.T[keep]
        tab.basis = [tab.basis[r] for r in keep]

    cost = np.zeros(width)
    for name, coef in model.objective.items():
        cost[index[name]] = coef
    status = tab.optimize(cost, ~artificial)
    if status != "optimal":
        return LpSolution(status, iterations=tab.iterations)

    x = np.zeros(width)
    x[tab.basis] = tab.T[:, -1]
    values = {name: float(max(x[i], 0.0)) for i, name in enumerate(model.names)}
    objective = math.fsum(model.objective.get(nm, 0.0) * v for nm, v in values.items())
    worst = max((c.violation(values) for c in model.constraints), default=0.0)
    if worst > CERT_TOL:
        raise ArithmeticError(f"simplex solution fails its certificate by {worst:.3e}")
    return LpSolution("optimal", objective, values, tab.iterations)


def _a(k: int) -> str:
    return f"a{k}"


def _b(k: int) -> str:
    return f"b{k}"


def build_edge_weighted_lp(gamma: float, kappa: float, k_max: int) -> LpModel:
    """Finite gain-sharing LP for the edge-weighted engine (variables ``Gamma, a0.., b0..``)."""
    if not 0.0 <= gamma <= 1.0:
        raise DomainError(f"gamma must lie in [0, 1], got {gamma}")
    if not 1.0 <= kappa <= 2.0:
        raise DomainError(f"kappa must lie in [1, 2], got {kappa}")
    if k_max < 1:
        raise DomainError(f"k_max must be at least 1, got {k_max}")
    lp = LpModel()
    G = lp.var("Gamma")
    for k in range(k_max + 1):
        lp.var(_a(k))
    for k in range(k_max + 1):
        lp.var(_b(k))
    lp.objective = {G: 1.0}
    K = range(k_max + 1)
    for k in K:
        coeffs = {_a(l): 1.0 for l in range(k, k_max + 1)}
        coeffs[_b(k)] = kappa
        lp.add(coeffs, "<=", 2.0 ** (-k) * (1 - gamma) ** max(k - 1, 0), f"i[{k}]")
    lp.add({_a(0): 1.0, _b(0): 1.0}, "<=", 0.5, "ii")
    for k in range(1, k_max + 1):
        lp.add({_a(k): 1.0, _b(k): 1.0}, "<=", 2.0 ** (-k - 1) * (1 - gamma) ** (k - 1) * (1 + gamma), f"iii[{k}]")
    lp.add({_a(0): 1.0}, ">=", gamma / 2, "iv")
    lp.add({**{_a(l): 1.0 for l in K}, G: -1.0}, ">=", 0.0, "v")
    for k in K:
        coeffs = {_a(l): 1.0 for l in range(k)}
        coeffs[_b(k)] = 2.0
        coeffs[G] = -1.0
        lp.add(coeffs, ">=", 0.0, f"vi[{k}]")
    for k in K:
        coeffs = {_a(l): 1.0 for l in range(k + 1)}
        coeffs[_b(k)] = kappa
        coeffs[G] = -1.0
        lp.add(coeffs, ">=", 0.0, f"vii[{k}]")
    return lp


def _da(k: int) -> str:
    return f"dalpha{k}"


def _db(k: int) -> str:
    return f"dbeta{k}"


def build_unweighted_lp(g: RecurrenceTable | Sequence[float], k_max: int) -> LpModel:
    """Finite dual-fitting LP for the two-choice greedy engine."""
    if len(g) < k_max + 2:
        raise DomainError(f"need g_0..g_{k_max + 1}, got {len(g)} values")
    lp = LpModel()
    G = lp.var("Gamma")
    for k in range(k_max + 1):
        lp.var(_da(k))
    for k in range(k_max + 1):
        lp.var(_db(k))
    lp.objective = {G: 1.0}
    for k in range(k_max + 1):
        rhs = 2.0 ** (-k) * g[k] - 2.0 ** (-k - 1) * g[k + 1]
        lp.add({_da(k): 1.0, _db(k): 1.0}, "<=", rhs, f"gain-split[{k}]")
    for k in range(k_max + 1):
        coeffs = {_da(l): 1.0 for l in range(k)}
        coeffs[_db(k)] = 2.0
        coeffs[G] = -1.0
        lp.add(coeffs, ">=", 0.0, f"feasibility[{k}]")
    lp.add({**{_da(l): 1.0 for l in range(k_max + 1)}, G: -1.0}, ">=", 0.0, "feasibility[inf]")
    for k in range(k_max):
        lp.add({_db(k): 1.0, _db(k + 1): -1.0}, ">=", 0.0, f"monotone[{k}]")
    return lp


def gain_table_from_solution(sol: LpSolution, gamma: float, kappa: float, k_max: int) -> GainTable:
    a = tuple(sol.values[_a(k)] for k in range(k_max + 1))
    b = tuple(sol.values[_b(k)] for k in range(k_max + 1))
    return GainTable(gamma, kappa, sol.objective, a, b, "lp")


def unweighted_table_from_solution(sol: LpSolution, k_max: int, p: float | None = None) -> UnweightedDualTable:
    da = tuple(sol.values[_da(k)] for k in range(k_max + 1))
    db = tuple(sol.values[_db(k)] for k in range(k_max + 1))
    return UnweightedDualTable(sol.objective, da, db, p if p is not None else optimal_p()[0], "lp")


@dataclass
class TableReport:
    max_violation: float
    worst: str
    tolerance: float
    violations: dict[str, float]

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tolerance


def _table_values(table) -> tuple[LpModel, dict[str, float]]:
    if isinstance(table, GainTable):
        model = build_edge_weighted_lp(table.gamma, table.kappa, table.k_max)
        values = {"Gamma": table.Gamma}
        values.update({_a(k): v for k, v in enumerate(table.a)})
        values.update({_b(k): v for k, v in enumerate(table.b)})
    else:
        g = [eval_g(k, table.p) for k in range(table.k_max + 2)]
        model = build_unweighted_lp(g, table.k_max)
        values = {"Gamma": table.Gamma}
        values.update({_da(k): v for k, v in enumerate(table.dalpha)})
        values.update({_db(k): v for k, v in enumerate(table.dbeta)})
    return model, values


def verify_table(table: GainTable | UnweightedDualTable, tolerance: float = 1e-6) -> TableReport:
    """Evaluate every constraint of the table's LP at the table's own values."""
    model, values = _table_values(table)
    violations = {c.label: c.violation(values) for c in model.constraints}
    for name, v in values.items():
        violations[f"{name}>=0"] = -v
    worst = max(violations, key=violations.get)
    return TableReport(violations[worst], worst, tolerance, violations)


def kappa_sweep(gamma: float, k_max: int, kappas: Iterable[float]) -> list[tuple[float, float]]:
    out = []
    for kappa in kappas:
        sol = solve(build_edge_weighted_lp(gamma, kappa, k_max))
        out.append((kappa, sol.objective))
    return out
