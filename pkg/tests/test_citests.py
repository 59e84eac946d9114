import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from structbench.citests import CITestError, FisherZ, G2, fisher_z_test, g2_test
from structbench.io import DataMatrix


def table_data(counts):
    """Categorical (x, y) rows realizing a 2-D contingency table."""
    rows = [(i, j) for i, row in enumerate(counts) for j, c in enumerate(row) for _ in range(c)]
    r = (len(counts), len(counts[0]))
    return DataMatrix(("x", "y"), np.array(rows), r)


def test_g2_perfect_independence():
    res = g2_test(table_data([[25, 25], [25, 25]]), 0, 1, [], 0.05)
    assert res.statistic == 0.0 and res.p_value == 1.0 and res.independent


def test_g2_df_with_three_level_conditioner():
    rng = np.random.default_rng(0)
    v = np.column_stack([rng.integers(0, 2, 100), rng.integers(0, 2, 100), rng.integers(0, 3, 100)])
    assert g2_test(DataMatrix(("a", "b", "c"), v, (2, 2, 3)), 0, 1, [2], 0.05).df == 3


def test_g2_deterministic_copy():
    x = np.tile([0, 1], 50)
    d = DataMatrix(("x", "y"), np.column_stack([x, x]), (2, 2))
    res = g2_test(d, 0, 1, [], 0.05)
    assert res.statistic == pytest.approx(2 * 100 * math.log(2))
    assert res.p_value < 1e-10 and not res.independent


def test_g2_errors():
    d = DataMatrix(("x", "y"), np.zeros((4, 2)), (1, 2))
    with pytest.raises(CITestError):
        g2_test(d, 0, 1, [], 0.05)
    with pytest.raises(CITestError):
        G2(DataMatrix(("x",), np.zeros((4, 1))))


def test_fisher_z_zero_correlation():
    d = DataMatrix(("x", "y"), np.array([[1, 1], [-1, 1], [1, -1], [-1, -1], [0, 0]], dtype=float))
    res = fisher_z_test(d, 0, 1, [], 0.05)
    assert res.statistic == 0.0 and res.p_value == 1.0


def test_fisher_z_perfect_correlation():
    x = np.random.default_rng(2).normal(size=50)
    res = fisher_z_test(DataMatrix(("x", "y"), np.column_stack([x, x])), 0, 1, [], 0.05)
    assert res.p_value < 1e-10 and not res.independent


def test_fisher_z_singular_conditioning_is_degenerate():
    x = np.random.default_rng(3).normal(size=(40, 2))
    v = np.column_stack([x, x[:, 0]])
    res = fisher_z_test(DataMatrix(("a", "b", "c"), v), 0, 1, [2], 0.05)
    assert res.degenerate and res.p_value == 0.0 and not res.independent


def test_fisher_z_needs_enough_rows():
    d = DataMatrix(("a", "b", "c"), np.random.default_rng(0).normal(size=(4, 3)))
    with pytest.raises(CITestError):
        fisher_z_test(d, 0, 1, [2], 0.05)
    with pytest.raises(CITestError):
        FisherZ(DataMatrix(("x",), np.zeros((4, 1)), (2,)))


def test_fisher_z_null_rejection_rate_on_chain():
    rng = np.random.default_rng(2024)
    n, reps, alpha = 5000, 2000, 0.05
    rejected = 0
    for _ in range(reps):
        x = rng.normal(size=n)
        z = 0.8 * x + rng.normal(size=n)
        y = -0.6 * z + rng.normal(size=n)
        res = fisher_z_test(DataMatrix(("x", "z", "y"), np.column_stack([x, z, y])), 0, 2, [1], alpha)
        rejected += not res.independent
    assert abs(rejected / reps - alpha) <= 0.02


@given(st.integers(0, 2**32), st.integers(0, 2))
@settings(max_examples=50)
def test_p_values_bounded_and_symmetric(seed, k):
    rng = np.random.default_rng(seed)
    cont = DataMatrix(("a", "b", "c", "d"), rng.normal(size=(30, 4)) @ rng.normal(size=(4, 4)))
    cat = DataMatrix(("a", "b", "c", "d"), rng.integers(0, 3, size=(60, 4)), (3, 3, 3, 3))
    cond = [2, 3][:k]
    for test in (FisherZ(cont), G2(cat)):
        ab, ba = test(0, 1, cond, 0.05), test(1, 0, cond, 0.05)
        assert 0.0 <= ab.p_value <= 1.0
        assert ab.p_value == pytest.approx(ba.p_value, rel=1e-9, abs=1e-15)
        assert ab.independent == (ab.p_value > 0.05)
