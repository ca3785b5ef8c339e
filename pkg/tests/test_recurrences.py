import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ocsmatch.errors import DomainError
from ocsmatch.recurrences import K_MAX, RecurrenceTable, eval_f, eval_g, gamma_from_p, optimal_p
from ocsmatch.tables import TABLE_3_G

P_STAR = (5 - math.sqrt(13)) / 3


def test_f_base_and_small_values():
    assert eval_f(0) == 1.0
    assert eval_f(1) == 1.0
    assert eval_f(2) == 0.9375
    assert eval_f(3) == 0.875


def test_f_follows_recurrence_independently():
    prev2, prev1 = 1.0, 1.0
    for k in range(2, K_MAX + 1):
        prev2, prev1 = prev1, prev1 - prev2 / 16
        assert eval_f(k) == pytest.approx(prev1, rel=1e-12, abs=1e-300)


def test_g_matches_published_column():
    assert eval_g(2, P_STAR) == pytest.approx(0.89007253, abs=1e-8)
    assert eval_g(4, P_STAR) == pytest.approx(0.68230164, abs=1e-8)
    for k, g in enumerate(TABLE_3_G):
        assert eval_g(k, P_STAR) == pytest.approx(g, abs=1e-8)


def test_g_base_case_for_any_p():
    for p in (0.0, 0.3, 1.0):
        assert eval_g(0, p) == 1.0
        assert eval_g(1, p) == 1.0


def test_domain_errors():
    with pytest.raises(DomainError):
        eval_g(3, 1.5)
    with pytest.raises(DomainError):
        eval_g(3, -0.1)
    with pytest.raises(DomainError):
        eval_f(K_MAX + 1)
    with pytest.raises(DomainError):
        eval_f(-1)


def test_gamma_endpoints_and_optimum():
    assert gamma_from_p(0.0) == 0.0
    assert gamma_from_p(1.0) == 0.0
    assert gamma_from_p(P_STAR) == pytest.approx((13 * math.sqrt(13) - 35) / 108, abs=1e-15)
    p, gamma = optimal_p()
    assert p == pytest.approx(0.4648162, abs=1e-7)
    assert gamma == pytest.approx(0.10992747, abs=1e-8)
    assert gamma_from_p(p) == gamma


def test_grid_search_finds_the_maximizer():
    grid = np.arange(0, 1 + 1e-12, 1e-4)
    vals = [gamma_from_p(float(p)) for p in grid]
    best = grid[int(np.argmax(vals))]
    assert abs(best - P_STAR) < 1e-3
    # single peak: increasing then decreasing
    diffs = np.sign(np.diff(vals))
    turns = np.count_nonzero(diffs[1:] != diffs[:-1])
    assert turns == 1


@pytest.mark.parametrize("p", [round(0.1 * t, 1) for t in range(11)])
def test_g_positive_and_nonincreasing(p):
    values = [eval_g(k, p) for k in range(K_MAX + 1)]
    assert all(v > 0 for v in values)
    assert all(b <= a for a, b in zip(values, values[1:]))


@given(st.integers(min_value=1, max_value=K_MAX))
def test_f_under_semi_ocs_chain(k):
    assert eval_f(k) <= (1 - 1 / 16) ** (k - 1) + 1e-15


def test_recurrence_table_objects():
    warm = RecurrenceTable.warmup(8)
    assert len(warm) == 9 and warm[2] == 0.9375
    imp = RecurrenceTable.improved(k_max=8)
    assert imp.p == pytest.approx(P_STAR)
    assert imp[4] == pytest.approx(0.68230164, abs=1e-8)
