"""Two-choice greedy for unweighted online matching.

An arrival looks at its neighbors that were never matched deterministically
and keeps those with the fewest randomized rounds so far.  Two or more such
neighbors give a randomized round on the first two (by id); a unique one is
matched deterministically.
"""
from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from .ocs import Selector
from .primal_dual import FEASIBILITY_TOL, InvariantReport, RoundOutcome, TranscriptRecord, Violation
from .recurrences import K_MAX, eval_g
from .tables import INF, UnweightedDualTable, builtin_table


def unmatched_mass(k, p: float) -> float:
    """``2^-k g_k``: upper bound on the probability a vertex is still unmatched."""
    if k == INF or k > K_MAX:
        return 0.0
    return 2.0 ** (-k) * eval_g(k, p)


class UnweightedEngine:
    def __init__(self, n_offline: int, table: UnweightedDualTable | None = None, reverse: bool = False):
        self.n_offline = n_offline
        self.table = table if table is not None else builtin_table("t3")
        self.reverse = reverse
        self.k = np.zeros(n_offline)
        self.alpha = np.zeros(n_offline)
        self.xbar = np.zeros(n_offline)
        self.betas: list[float] = []
        self.edges: list[np.ndarray] = []
        self.k_at_arrival: list[np.ndarray] = []
        self.outcomes: list[RoundOutcome] = []
        self.transcript: list[TranscriptRecord] = []
        self.matched = np.zeros(n_offline, dtype=bool)
        self._pbar = 0.0
        self._alpha_sum = 0.0

    def greedy_arrive(self, neighbors: Iterable[int], selector: Selector | None) -> RoundOutcome:
        nb = np.unique(np.fromiter(neighbors, dtype=np.int64))
        if nb.size and (nb[0] < 0 or nb[-1] >= self.n_offline):
            raise IndexError("neighbor id out of range")
        table = self.table
        k_nb = self.k[nb]
        self.edges.append(nb)
        self.k_at_arrival.append(k_nb.copy())

        live = nb[np.isfinite(k_nb)]
        outcome = RoundOutcome("unmatched", 0.0)
        if live.size:
            k_live = self.k[live]
            k_min = k_live.min()
            tied = live[k_live == k_min]
            if self.reverse:
                tied = tied[::-1]
            k_min = int(k_min)
            if tied.size >= 2:
                i1, i2 = int(tied[0]), int(tied[1])
                chosen = selector.select((i1, i2)) if selector is not None else None
                beta = 2.0 * table.dbeta_at(k_min)
                outcome = RoundOutcome("randomized", beta, i1, i2, chosen, 1.0, 1.0)
                for i in (i1, i2):
                    self.alpha[i] += table.dalpha_at(k_min)
                    self._alpha_sum += table.dalpha_at(k_min)
                    gain = unmatched_mass(k_min, table.p) - unmatched_mass(k_min + 1, table.p)
                    self.xbar[i] += gain
                    self._pbar += gain
                    self.k[i] = k_min + 1
            else:
                i = int(tied[0])
                beta = 2.0 * table.dbeta_at(k_min + 1)
                outcome = RoundOutcome("deterministic", beta, i, None, i, 1.0)
                bump = table.alpha_suffix(k_min)
                self.alpha[i] += bump
                self._alpha_sum += bump
                gain = unmatched_mass(k_min, table.p)
                self.xbar[i] += gain
                self._pbar += gain
                self.k[i] = INF

        if outcome.selected is not None:
            self.matched[outcome.selected] = True
        self.betas.append(outcome.beta)
        self.outcomes.append(outcome)
        self.transcript.append(
            TranscriptRecord(len(self.outcomes) - 1, outcome.kind, outcome.i1, outcome.i2,
                             outcome.selected, outcome.beta, self._pbar, self._alpha_sum + math.fsum(self.betas))
        )
        return outcome

    def surrogate_primal(self) -> float:
        return math.fsum(self.xbar)

    def dual_objective(self) -> float:
        return math.fsum(list(self.alpha) + self.betas)

    def algorithm_value(self) -> float:
        return float(self.matched.sum())

    def pairs(self) -> list[tuple[int, int]]:
        return [o.pair for o in self.outcomes if o.kind == "randomized"]


def greedy_arrive(engine: UnweightedEngine, neighbors: Iterable[int], selector: Selector | None) -> RoundOutcome:
    return engine.greedy_arrive(neighbors, selector)


def check_unweighted_invariants(engine: UnweightedEngine, table: UnweightedDualTable | None = None) -> InvariantReport:
    table = table or engine.table
    report = InvariantReport()
    for i in range(engine.n_offline):
        k = engine.k[i]
        k = INF if math.isinf(k) else int(k)
        report.checked += 2
        expected_x = 1.0 - unmatched_mass(k, table.p)
        if abs(engine.xbar[i] - expected_x) > 1e-12:
            report.violations.append(Violation("xbar-drift", -abs(engine.xbar[i] - expected_x), i))
        expected_a = table.alpha_prefix(k)
        if abs(engine.alpha[i] - expected_a) > 1e-12:
            report.violations.append(Violation("alpha-invariant", -abs(engine.alpha[i] - expected_a), i))

    pbar, dual = engine.surrogate_primal(), engine.dual_objective()
    report.checked += 1
    if dual - pbar > FEASIBILITY_TOL:
        report.violations.append(Violation("reverse-weak-duality", pbar - dual))

    for j, (nb, beta) in enumerate(zip(engine.edges, engine.betas)):
        for i in nb:
            report.checked += 1
            slack = engine.alpha[i] + beta - table.Gamma
            if slack < -FEASIBILITY_TOL:
                report.violations.append(Violation("approximate-dual-feasibility", slack, int(i), j))
    return report


def perfect_correlation_sim(arrivals: Sequence[Iterable[int]], n_offline: int, reverse: bool = True) -> float:
    """Fractional two-choice greedy where two randomized rounds fully match a vertex.

    Each offline vertex carries matched mass 0, 1/2 or 1.  Among neighbors
    with mass below 1, those of least mass are candidates; two or more give
    half a unit to the first two, a unique one is fully matched.
    """
    mass = [0.0] * n_offline
    for nb in arrivals:
        live = sorted({i for i in nb if mass[i] < 1.0}, reverse=reverse)
        if not live:
            continue
        least = min(mass[i] for i in live)
        tied = [i for i in live if mass[i] == least]
        if len(tied) >= 2:
            mass[tied[0]] += 0.5
            mass[tied[1]] += 0.5
        else:
            mass[tied[0]] = 1.0
    return math.fsum(mass)
