import math

import pytest
from hypothesis import given, strategies as st
from scipy import stats as sps

from rbnedit.stats import NotComputable, betainc_regularized, welch_t_test

A = [19.8, 20.4, 19.6, 17.8, 18.5, 18.9, 18.3, 18.9, 19.5, 22.0]
B = [28.2, 26.6, 20.1, 23.3, 25.2, 22.1, 17.7, 27.6, 20.6, 13.7,
     23.2, 17.5, 20.6, 18.0, 23.9, 21.6, 24.3, 20.4, 24.0, 13.2]
# scipy.stats.ttest_ind(A, B, equal_var=False), computed before the build
T_REF, DF_REF, P_REF = -2.2192409158236233, 24.496223124201244, 0.03597227102979685


def test_fixed_dataset():
    t, df, p = welch_t_test(A, B)
    assert t == pytest.approx(T_REF, rel=0.01)
    assert df == pytest.approx(DF_REF, rel=0.01)
    assert p == pytest.approx(P_REF, rel=0.01)
    # the numerics are in fact far tighter than the 1% contract
    assert p == pytest.approx(P_REF, rel=1e-9)


def test_identity():
    t, _, p = welch_t_test(A, A)
    assert t == 0.0 and p == 1.0


def test_swap_symmetry():
    t1, df1, p1 = welch_t_test(A, B)
    t2, df2, p2 = welch_t_test(B, A)
    assert t1 == -t2 and df1 == df2 and p1 == p2


@pytest.mark.parametrize("a,b", [([1.0], [1.0, 2.0]), ([1.0, 1.0], [1.0, 2.0]), ([1.0, 2.0], [3.0, 3.0])])
def test_degenerate(a, b):
    with pytest.raises(NotComputable):
        welch_t_test(a, b)


@pytest.mark.parametrize("a,b,x", [(0.5, 0.5, 0.3), (12.0, 0.5, 0.9), (2.0, 3.0, 0.01), (40.0, 0.5, 0.999)])
def test_betainc_against_scipy(a, b, x):
    from scipy.special import betainc
    assert betainc_regularized(a, b, x) == pytest.approx(betainc(a, b, x), rel=1e-10)


samples = st.lists(st.floats(-100, 100, allow_nan=False), min_size=2, max_size=30).filter(
    lambda xs: max(xs) - min(xs) > 1e-3)


@given(samples, samples)
def test_matches_scipy(a, b):
    t, df, p = welch_t_test(a, b)
    ref = sps.ttest_ind(a, b, equal_var=False)
    assert 0.0 <= p <= 1.0
    assert t == pytest.approx(ref.statistic, rel=1e-8, abs=1e-9)
    assert p == pytest.approx(ref.pvalue, rel=1e-6, abs=1e-12)


@given(samples, samples, st.floats(-50, 50))
def test_shift_invariance(a, b, c):
    t1, df1, p1 = welch_t_test(a, b)
    t2, df2, p2 = welch_t_test([x + c for x in a], [x + c for x in b])
    # arbitrary floats lose a few ulps in the shift itself
    assert math.isclose(t1, t2, rel_tol=1e-9, abs_tol=1e-12)
    assert math.isclose(df1, df2, rel_tol=1e-9)
    assert math.isclose(p1, p2, rel_tol=1e-9, abs_tol=1e-12)


def test_shift_invariance_fixed_dataset():
    t1, df1, p1 = welch_t_test(A, B)
    t2, df2, p2 = welch_t_test([x + 1000 for x in A], [x + 1000 for x in B])
    assert abs(t1 - t2) < 1e-12 and abs(df1 - df2) < 1e-12 and abs(p1 - p2) < 1e-12
