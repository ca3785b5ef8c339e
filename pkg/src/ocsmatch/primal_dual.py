"""Edge-weighted online matching with free disposal, driven by a correlated selector.

Each offline vertex carries three step functions of the weight-level ``w``:
the randomized-round count ``k(w)`` (``inf`` once matched deterministically at
that level), the offline dual ``alpha(w)``, and the surrogate CCDF
``ybar(w)``.  Each arrival is turned into a randomized, deterministic or
unmatched round by comparing the online dual gains ``delta_r``/``delta_d``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import DomainError
from .ocs import Selector
from .stepfn import StepFunction
from .tables import INF, GainTable, builtin_table

ALPHA_TOL = 1e-12
FEASIBILITY_TOL = 1e-9


class OfflineDualState:
    """Dual and surrogate-primal bookkeeping for one offline vertex."""

    def __init__(self):
        self.k = StepFunction(tail=0)
        self.alpha = StepFunction(tail=0.0)
        self.ybar = StepFunction(tail=0.0)
        self.last_weight = 0.0

    def split(self, w: float) -> None:
        for fn in (self.k, self.alpha, self.ybar):
            fn.split(w)

    def alpha_integral(self) -> float:
        return self.alpha.integral()

    def ybar_integral(self) -> float:
        return self.ybar.integral()


def delta_r(state: OfflineDualState, w_ij: float, table: GainTable) -> float:
    """Online dual gain from ``i`` if it is one of two candidates in a randomized round."""
    if w_ij < 0:
        raise DomainError(f"edge weights are nonnegative, got {w_ij}")
    gain = state.k.integral(0.0, w_ij, table.b_at)
    refund = state.k.integral(w_ij, math.inf, table.a_prefix)
    return gain - 0.5 * refund


def delta_d(state: OfflineDualState, w_ij: float, table: GainTable) -> float:
    """Online dual gain from ``i`` if ``j`` is matched to it deterministically."""
    return table.kappa * delta_r(state, w_ij, table)


@dataclass
class RoundOutcome:
    """Result of one arrival.

    ``kind`` is ``"unmatched"``, ``"deterministic"`` or ``"randomized"``.
    For a deterministic round ``i1`` is the matched vertex and ``i2`` is None.
    """

    kind: str
    beta: float
    i1: int | None = None
    i2: int | None = None
    selected: int | None = None
    w1: float = 0.0
    w2: float = 0.0

    @property
    def pair(self) -> tuple[int, int]:
        return self.i1, self.i2


@dataclass
class TranscriptRecord:
    round: int
    type: str
    i1: int | None
    i2: int | None
    selected: int | None
    beta: float
    pbar: float
    dual: float


@dataclass
class Violation:
    check: str
    slack: float
    vertex: int | None = None
    online: int | None = None
    level: float | None = None

    def __str__(self) -> str:
        where = ", ".join(
            f"{name}={val}" for name, val in
            (("vertex", self.vertex), ("online", self.online), ("level", self.level)) if val is not None
        )
        return f"{self.check} violated ({where}) by {-self.slack:.3e}"


@dataclass
class InvariantReport:
    violations: list[Violation] = field(default_factory=list)
    checked: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    def raise_if_failed(self) -> None:
        if self.violations:
            raise AssertionError("; ".join(str(v) for v in self.violations[:10]))


def _ranked(scores: Sequence[float]) -> list[int]:
    return sorted(range(len(scores)), key=lambda i: (-scores[i], i))


class EdgeWeightedEngine:
    """Online primal-dual matcher for edge-weighted bipartite graphs."""

    def __init__(self, n_offline: int, table: GainTable | None = None):
        self.n_offline = n_offline
        self.table = table if table is not None else builtin_table("1b")
        self.states = [OfflineDualState() for _ in range(n_offline)]
        self.betas: list[float] = []
        self.edges: list[dict[int, float]] = []
        self.outcomes: list[RoundOutcome] = []
        self.transcript: list[TranscriptRecord] = []
        self.matched_weight = [0.0] * n_offline

    def _weights(self, weights: Mapping[int, float] | Sequence[float]) -> list[float]:
        items = weights.items() if isinstance(weights, Mapping) else enumerate(weights)
        dense = [0.0] * self.n_offline
        for i, w in items:
            if not 0 <= i < self.n_offline:
                raise DomainError(f"offline vertex {i} out of range")
            w = float(w)
            if not (w >= 0 and math.isfinite(w)):
                raise DomainError(f"edge weight must be finite and nonnegative, got {w}")
            dense[i] = w
        return dense

    def arrive(self, weights: Mapping[int, float] | Sequence[float], selector: Selector | None) -> RoundOutcome:
        """Process one online vertex.

        With ``selector=None`` randomized rounds are recorded without picking a
        winner; the round structure does not depend on the selections, so the
        pairs can be replayed later through any selector.
        """
        w = self._weights(weights)
        table = self.table
        dr = [delta_r(st, wi, table) for st, wi in zip(self.states, w)]
        dd = [table.kappa * x for x in dr]

        outcome = RoundOutcome("unmatched", 0.0)
        if self.n_offline:
            order = _ranked(dr)
            i_star = _ranked(dd)[0]
            best_d = dd[i_star]
            if self.n_offline >= 2:
                i1, i2 = order[0], order[1]
                best_r = dr[i1] + dr[i2]
            else:
                best_r = -math.inf
            if best_r >= max(best_d, 0.0):
                chosen = selector.select((i1, i2)) if selector is not None else None
                outcome = RoundOutcome("randomized", best_r, i1, i2, chosen, w[i1], w[i2])
                self._randomized_update(self.states[i1], w[i1])
                self._randomized_update(self.states[i2], w[i2])
            elif best_d >= 0.0:
                outcome = RoundOutcome("deterministic", best_d, i_star, None, i_star, w[i_star])
                self._deterministic_update(self.states[i_star], w[i_star])

        if outcome.selected is not None:
            chosen_w = outcome.w1 if outcome.selected == outcome.i1 else outcome.w2
            self.matched_weight[outcome.selected] = max(self.matched_weight[outcome.selected], chosen_w)
        self.betas.append(outcome.beta)
        self.edges.append({i: wi for i, wi in enumerate(w) if wi > 0})
        self.outcomes.append(outcome)
        self.transcript.append(
            TranscriptRecord(len(self.outcomes) - 1, outcome.kind, outcome.i1, outcome.i2,
                             outcome.selected, outcome.beta, self.surrogate_primal(), self.dual_objective())
        )
        return outcome

    def _randomized_update(self, st: OfflineDualState, w_ij: float) -> None:
        table = self.table
        w_prev = st.last_weight
        st.split(w_ij)
        st.split(w_prev)
        keep = (1.0 - table.gamma) / 2.0
        for t, hi in enumerate(st.k.breakpoints):
            k = st.k.values[t]
            if hi <= w_ij:
                if hi <= w_prev or k == 0:
                    st.alpha.values[t] += table.a_at(k)
                else:
                    st.alpha.values[t] += table.a_at(k) - table.prepay(k)
                factor = keep if (hi <= w_prev and k >= 1) else 0.5
                st.ybar.values[t] = 1.0 - (1.0 - st.ybar.values[t]) * factor
                st.k.values[t] = k + 1
            elif k >= 1:
                st.alpha.values[t] += table.prepay(k)
        st.last_weight = w_ij

    def _deterministic_update(self, st: OfflineDualState, w_ij: float) -> None:
        st.split(w_ij)
        for t, hi in enumerate(st.k.breakpoints):
            if hi > w_ij:
                break
            st.alpha.values[t] += self.table.a_suffix(st.k.values[t])
            st.k.values[t] = INF
            st.ybar.values[t] = 1.0

    def surrogate_primal(self) -> float:
        return math.fsum(st.ybar_integral() for st in self.states)

    def dual_objective(self) -> float:
        return math.fsum([st.alpha_integral() for st in self.states] + self.betas)

    def algorithm_value(self) -> float:
        """Sum over offline vertices of the heaviest edge matched in this realization."""
        return math.fsum(self.matched_weight)

    def pairs(self) -> list[tuple[int, int]]:
        return [o.pair for o in self.outcomes if o.kind == "randomized"]


def check_invariants(engine: EdgeWeightedEngine, table: GainTable | None = None) -> InvariantReport:
    """Check the dual invariants, reverse weak duality and approximate dual feasibility."""
    table = table or engine.table
    report = InvariantReport()
    alpha_totals = []
    for i, st in enumerate(engine.states):
        for (lo, hi, k), (_, _, alpha), (_, _, ybar) in zip(st.k.pieces(), st.alpha.pieces(), st.ybar.pieces()):
            report.checked += 2
            slack = alpha - table.a_prefix(k)
            if slack < -ALPHA_TOL:
                report.violations.append(Violation("alpha-invariant", slack, i, level=hi))
            slack = (1.0 - ybar) - table.unmatched_lower_bound(k)
            if slack < -ALPHA_TOL:
                report.violations.append(Violation("ybar-lower-bound", slack, i, level=hi))
        for name, fn in (("k-monotone", st.k), ("ybar-monotone", st.ybar)):
            if not fn.is_nonincreasing():
                report.violations.append(Violation(name, -1.0, i))
        alpha_totals.append(st.alpha_integral())

    pbar = engine.surrogate_primal()
    dual = math.fsum(alpha_totals + engine.betas)
    report.checked += 1
    if dual - pbar > FEASIBILITY_TOL * (1.0 + abs(pbar)):
        report.violations.append(Violation("reverse-weak-duality", pbar - dual))

    for j, (edges, beta) in enumerate(zip(engine.edges, engine.betas)):
        for i, w in edges.items():
            report.checked += 1
            slack = alpha_totals[i] + beta - table.Gamma * w
            if slack < -FEASIBILITY_TOL:
                report.violations.append(Violation("approximate-dual-feasibility", slack, i, j, w))
    return report


def realized_values(n_offline: int, outcomes: Sequence[RoundOutcome], choices: np.ndarray) -> np.ndarray:
    """Matching value for each row of ``choices`` given a fixed round structure.

    ``choices[t, r]`` is 0 when the ``r``-th randomized round selected its first
    candidate in trial ``t`` and 1 otherwise.
    """
    choices = np.atleast_2d(choices)
    trials = choices.shape[0]
    best = np.zeros((trials, n_offline))
    rows = np.arange(trials)
    r = 0
    for o in outcomes:
        if o.kind == "deterministic":
            best[:, o.i1] = np.maximum(best[:, o.i1], o.w1)
        elif o.kind == "randomized":
            second = choices[:, r].astype(bool)
            who = np.where(second, o.i2, o.i1)
            wt = np.where(second, o.w2, o.w1)
            best[rows, who] = np.maximum(best[rows, who], wt)
            r += 1
    return best.sum(axis=1)
