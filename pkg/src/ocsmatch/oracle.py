"""Exact references used to certify the fast paths.

* :func:`offline_optimum` solves the free-disposal optimum as a plain
  maximum-weight matching.  Sending extra online vertices to an offline
  vertex never adds anything beyond its heaviest edge, so some optimal
  free-disposal assignment is a matching.
* :func:`selection_distribution` enumerates every random branch of the real
  selector classes, merging branches that reach the same selector state.
"""
from __future__ import annotations

from collections import defaultdict
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .errors import SizeError
from .instance import Instance
from .ocs import RandomSource, Selector, SelectorKind, make_selector
from .primal_dual import EdgeWeightedEngine, realized_values
from .unweighted import UnweightedEngine

MAX_EXACT_PAIRS = 8


def offline_optimum(instance: Instance) -> float:
    """Maximum total weight of a matching (each vertex used at most once)."""
    if instance.n_online == 0 or instance.n_offline == 0:
        return 0.0
    if instance.is_unweighted():
        rows, cols = [], []
        for j, arrival in enumerate(instance.arrivals):
            for i, _ in arrival:
                rows.append(j)
                cols.append(i)
        graph = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(instance.n_online, instance.n_offline))
        return float((maximum_bipartite_matching(graph, perm_type="column") >= 0).sum())
    weights = np.zeros((instance.n_online, instance.n_offline))
    for j, arrival in enumerate(instance.arrivals):
        for i, w in arrival:
            weights[j, i] = w
    r, c = linear_sum_assignment(weights, maximize=True)
    return float(weights[r, c].sum())


def brute_force_optimum(instance: Instance) -> float:
    """Enumerate every matching by depth-first search; exponential, for cross-checks only."""
    arrivals = [[(i, w) for i, w in a if w > 0] for a in instance.arrivals]
    used = [False] * instance.n_offline

    def best_from(j: int) -> float:
        if j == len(arrivals):
            return 0.0
        best = best_from(j + 1)  # online vertex j left unmatched
        for i, w in arrivals[j]:
            if not used[i]:
                used[i] = True
                best = max(best, w + best_from(j + 1))
                used[i] = False
        return best

    return best_from(0)


class _NeedDraw(Exception):
    def __init__(self, p: float):
        self.p = p


class _ScriptedSource(RandomSource):
    def __init__(self, script: Sequence[bool]):
        self.script = script
        self.pos = 0

    def bernoulli(self, p: float) -> bool:
        if self.pos == len(self.script):
            raise _NeedDraw(p)
        out = self.script[self.pos]
        self.pos += 1
        return out


def _branches(selector: Selector, pair) -> list[tuple[float, int, Selector]]:
    """Every outcome of one ``select`` call with its probability."""
    out = []
    stack: list[tuple[tuple[bool, ...], float]] = [((), 1.0)]
    while stack:
        script, prob = stack.pop()
        clone = selector.fork(_ScriptedSource(script))
        try:
            chosen = clone.select(pair)
        except _NeedDraw as need:
            if need.p > 0:
                stack.append((script + (True,), prob * need.p))
            if need.p < 1:
                stack.append((script + (False,), prob * (1.0 - need.p)))
            continue
        out.append((prob, chosen, clone))
    return out


def selection_distribution(
    kind: SelectorKind, pairs: Sequence[Sequence[int]], max_pairs: int = MAX_EXACT_PAIRS
) -> dict[tuple[int, ...], float]:
    """Exact joint law of the selections (0 = first, 1 = second) over a pair sequence."""
    if len(pairs) > max_pairs:
        raise SizeError(f"exact enumeration is limited to {max_pairs} pairs, got {len(pairs)}")
    start = make_selector(kind, RandomSource(0))
    # frontier: selector state -> (representative selector, law of the choices made so far)
    frontier: dict = {start.state_key(): (start, {(): 1.0})}
    for pair in pairs:
        nxt: dict = {}
        for sel, law in frontier.values():
            for q, chosen, clone in _branches(sel, pair):
                bit = (int(chosen != pair[0]),)
                _, target = nxt.setdefault(clone.state_key(), (clone, defaultdict(float)))
                for choices, prob in law.items():
                    target[choices + bit] += prob * q
        frontier = nxt
    total: dict[tuple[int, ...], float] = defaultdict(float)
    for _, law in frontier.values():
        for choices, prob in law.items():
            total[choices] += prob
    return dict(total)


def exact_never_selected(
    kind: SelectorKind, pairs: Sequence[Sequence[int]], element: int, subsequence: Sequence[int]
) -> float:
    """Exact probability that ``element`` is selected in none of the indexed pairs."""
    idx = sorted(set(subsequence))
    for j in idx:
        if element not in pairs[j]:
            raise ValueError(f"pair {j} does not contain element {element}")
    total = 0.0
    for choices, prob in selection_distribution(kind, pairs).items():
        if all(pairs[j][choices[j]] != element for j in idx):
            total += prob
    return total


def run_structure(instance: Instance, engine: str, table=None, reverse: bool = False):
    """Run an engine with deferred selections; returns the engine (round structure fixed)."""
    if engine == "edge_weighted":
        eng = EdgeWeightedEngine(instance.n_offline, table)
        for j in range(instance.n_online):
            eng.arrive(instance.weight_dict(j), None)
    elif engine in ("unweighted", "independent_greedy"):
        eng = UnweightedEngine(instance.n_offline, table, reverse=reverse)
        for j in range(instance.n_online):
            eng.greedy_arrive(instance.neighbors(j), None)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    return eng


def exact_algorithm_value(
    instance: Instance, engine: str, selector: SelectorKind, table=None, reverse: bool = False
) -> float:
    """Exact expected matching value of an engine, enumerating the selector's randomness."""
    eng = run_structure(instance, engine, table, reverse)
    pairs = eng.pairs()
    if len(pairs) > MAX_EXACT_PAIRS:
        raise SizeError(f"{len(pairs)} randomized rounds exceed the exact limit of {MAX_EXACT_PAIRS}")
    law = selection_distribution(selector, pairs)
    choices = np.array(list(law.keys()), dtype=np.int8).reshape(len(law), len(pairs))
    probs = np.array(list(law.values()))
    values = realized_values(instance.n_offline, eng.outcomes, choices)
    return float(probs @ values)
