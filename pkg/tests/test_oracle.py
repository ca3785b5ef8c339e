import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ocsmatch.errors import SizeError
from ocsmatch.instance import Instance
from ocsmatch.ocs import SelectorKind, consecutive_decomposition, simulate_batch
from ocsmatch.oracle import (brute_force_optimum, exact_algorithm_value, exact_never_selected, offline_optimum,
                             run_structure, selection_distribution)
from ocsmatch.primal_dual import realized_values
from ocsmatch.recurrences import eval_f, eval_g
from ocsmatch.workbench import random_bipartite, upper_triangular

EXAMPLE = [(10, 1), (11, 1), (12, 13), (14, 1), (1, 19)]


def test_optimum_examples():
    assert offline_optimum(Instance(1, [[(0, 3.5)]])) == 3.5
    assert offline_optimum(Instance(2, [[(0, 1.0), (1, 2.0)], [(0, 2.0), (1, 1.0)]])) == 4.0
    assert offline_optimum(upper_triangular(50)) == 50.0
    assert offline_optimum(Instance(3, [])) == 0.0


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 6), m=st.integers(1, 6), density=st.floats(0.1, 1.0), seed=st.integers(0, 10**6),
       unit=st.booleans())
def test_optimum_matches_brute_force(n, m, density, seed, unit):
    inst = random_bipartite(n, m, 10.0, density, seed)
    if unit:
        inst = Instance(n, [[(i, 1) for i, _ in a] for a in inst.arrivals])
    assert offline_optimum(inst) == pytest.approx(brute_force_optimum(inst), abs=1e-9)


def test_brute_force_on_eight_by_eight():
    inst = random_bipartite(8, 8, 10.0, 0.35, 17)
    assert offline_optimum(inst) == pytest.approx(brute_force_optimum(inst), abs=1e-9)


def test_independent_is_exactly_dyadic():
    pairs = [(0, 1), (0, 2), (3, 4), (0, 3), (5, 0)]
    for idx in ([0], [0, 1], [0, 1, 3], [0, 1, 3, 4]):
        assert exact_never_selected(SelectorKind.independent(), pairs, 0, idx) == 2.0 ** -len(idx)


def test_published_example_sequence():
    kind = SelectorKind.improved()
    value = exact_never_selected(kind, EXAMPLE, 1, [0, 1, 4])
    bound = 2**-3 * eval_g(2, kind.p) * eval_g(1, kind.p)
    assert bound == pytest.approx(0.111259, abs=1e-6)
    assert value <= bound + 1e-12


def test_size_limit():
    with pytest.raises(SizeError):
        selection_distribution(SelectorKind.warmup(), [(0, 1)] * 9)


def test_law_sums_to_one():
    for kind in (SelectorKind.warmup(), SelectorKind.improved(0.3)):
        law = selection_distribution(kind, [(0, 1), (1, 2), (2, 0), (0, 1), (1, 3), (3, 0), (0, 2), (2, 1)])
        assert math.fsum(law.values()) == pytest.approx(1.0, abs=1e-12)


def _runs_bound(kind, runs):
    if kind.name == "warmup":
        return math.prod(2.0**-k * eval_f(k) for k in runs)
    return math.prod(2.0**-k * eval_g(k, kind.p) for k in runs)


@settings(max_examples=40, deadline=None)
@given(pairs=st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4)).filter(lambda t: t[0] != t[1]),
                      min_size=1, max_size=8),
       data=st.data())
def test_lemma_bounds_hold_exactly(pairs, data):
    element = data.draw(st.sampled_from(sorted({e for p in pairs for e in p})))
    holders = [j for j, p in enumerate(pairs) if element in p]
    idx = data.draw(st.lists(st.sampled_from(holders), unique=True, min_size=1))
    runs = consecutive_decomposition(pairs, element, idx)
    for kind in (SelectorKind.warmup(), SelectorKind.improved()):
        assert exact_never_selected(kind, pairs, element, idx) <= _runs_bound(kind, runs) + 1e-10


def test_shared_neighbor_sequences_respect_bound():
    # consecutive pairs share the partner as well as the element, the coupling's hard case
    pairs = [(0, 1), (0, 1), (1, 0), (0, 2), (2, 0), (0, 1), (1, 2), (0, 2)]
    idx = [j for j, p in enumerate(pairs) if 0 in p]
    runs = consecutive_decomposition(pairs, 0, idx)
    for kind in (SelectorKind.warmup(), SelectorKind.improved()):
        assert exact_never_selected(kind, pairs, 0, idx) <= _runs_bound(kind, runs) + 1e-10


def test_exact_value_without_randomized_rounds():
    inst = Instance(2, [[(0, 2.0)], [(1, 3.0)]])
    eng = run_structure(inst, "edge_weighted")
    assert not eng.pairs()
    assert exact_algorithm_value(inst, "edge_weighted", SelectorKind.warmup()) == pytest.approx(5.0)


def test_exact_value_complete_two_by_two():
    inst = Instance(2, [[(0, 1), (1, 1)], [(0, 1), (1, 1)]])
    for engine in ("edge_weighted", "unweighted"):
        eng = run_structure(inst, engine)
        exact = exact_algorithm_value(inst, engine, SelectorKind.improved())
        trials = 100_000
        vals = realized_values(2, eng.outcomes,
                               simulate_batch(SelectorKind.improved(), eng.pairs(), trials, np.random.default_rng(4)))
        assert abs(vals.mean() - exact) <= 5 * vals.std() / math.sqrt(trials) + 1e-12
        assert exact >= eng.surrogate_primal() - 1e-12


def test_exact_value_too_many_rounds():
    with pytest.raises(SizeError):
        exact_algorithm_value(upper_triangular(40), "unweighted", SelectorKind.warmup())
