import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nonreg import ValidationError
from nonreg.quantiles import (
    chi2_quantile,
    empirical_quantile,
    normal_quantile,
    weighted_quantile,
)

mpmath.mp.dps = 40


def _normal_quantile_mp(q):
    return float(mpmath.sqrt(2) * mpmath.erfinv(2 * mpmath.mpf(q) - 1))


def _chi2_cdf_mp(x, df):
    return float(mpmath.gammainc(df / 2, 0, mpmath.mpf(x) / 2, regularized=True))


@pytest.mark.parametrize("q", [1e-6, 0.01, 0.05, 0.1, 0.3, 0.5, 0.7, 0.9, 0.95, 0.975, 0.99, 1 - 1e-6])
def test_normal_quantile_against_mpmath(q):
    assert normal_quantile(q) == pytest.approx(_normal_quantile_mp(q), abs=1e-10)


def test_normal_quantile_table_values():
    assert normal_quantile(0.975) == pytest.approx(1.959963984540054, abs=1e-12)
    assert normal_quantile(0.95) == pytest.approx(1.6448536269514722, abs=1e-12)
    assert normal_quantile(0.5) == 0.0


# central range only: deeper in the tail 1-q itself rounds, and the quantile's
# slope there turns that rounding into ~1e-11 of spurious asymmetry
@given(st.floats(min_value=0.01, max_value=0.5))
def test_normal_quantile_symmetry(q):
    assert normal_quantile(q) == pytest.approx(-normal_quantile(1.0 - q), abs=1e-12)


@pytest.mark.parametrize("df", [1, 2, 3, 5, 10, 50])
@pytest.mark.parametrize("q", [0.05, 0.5, 0.9, 0.95, 0.99])
def test_chi2_quantile_inverts_cdf(q, df):
    x = chi2_quantile(q, df)
    assert _chi2_cdf_mp(x, df) == pytest.approx(q, abs=1e-12)


def test_chi2_quantile_table_values():
    assert chi2_quantile(0.95, 1) == pytest.approx(3.841458820694124, abs=1e-10)
    # chi2(2) is exponential with mean 2, so the quantile is -2 log(1 - q)
    assert chi2_quantile(0.9, 2) == pytest.approx(-2.0 * math.log(0.1), abs=1e-10)
    assert chi2_quantile(0.95, 1) == pytest.approx(normal_quantile(0.975) ** 2, abs=1e-10)


def test_empirical_quantile_nearest_rank():
    vals = [3.0, 1.0, 2.0]
    assert empirical_quantile(vals, 0.5) == 2.0
    assert empirical_quantile(vals, 1.0 / 3.0) == 1.0
    assert empirical_quantile(vals, 0.34) == 2.0
    assert empirical_quantile(vals, 0.99) == 3.0
    assert empirical_quantile([5.0], 0.2) == 5.0


def test_weighted_quantile_hand_case():
    vals = [10.0, 20.0, 30.0]
    w = [1.0, 1.0, 2.0]
    assert weighted_quantile(vals, w, 0.25) == 10.0
    assert weighted_quantile(vals, w, 0.5) == 20.0
    assert weighted_quantile(vals, w, 0.51) == 30.0
    # mass reaches the top value as q -> 1
    assert weighted_quantile(vals, w, 1.0 - 1e-12) == 30.0


def test_weighted_quantile_skips_zero_weight():
    assert weighted_quantile([1.0, 2.0, 3.0], [0.0, 1.0, 1.0], 0.1) == 2.0


@given(
    st.lists(st.floats(-100, 100), min_size=1, max_size=20),
    st.floats(min_value=0.01, max_value=0.99),
)
def test_weighted_matches_empirical_with_unit_weights(vals, q):
    assert weighted_quantile(vals, np.ones(len(vals)), q) == empirical_quantile(vals, q)


@given(
    st.lists(
        st.tuples(st.floats(-50, 50), st.integers(min_value=0, max_value=5)),
        min_size=1,
        max_size=12,
    ).filter(lambda pairs: any(w > 0 for _, w in pairs)),
    st.floats(min_value=0.01, max_value=0.99),
)
def test_integer_weights_match_expanded_sample(pairs, q):
    vals = np.array([v for v, _ in pairs])
    w = np.array([float(k) for _, k in pairs])
    expanded = np.repeat(vals, w.astype(int))
    assert weighted_quantile(vals, w, q) == empirical_quantile(expanded, q)


@pytest.mark.parametrize("q", [0.0, 1.0, -0.1, 1.5, float("nan")])
def test_levels_outside_unit_interval_rejected(q):
    with pytest.raises(ValidationError):
        normal_quantile(q)
    with pytest.raises(ValidationError):
        chi2_quantile(q, 2)
    with pytest.raises(ValidationError):
        empirical_quantile([1.0], q)
    with pytest.raises(ValidationError):
        weighted_quantile([1.0], [1.0], q)


def test_degenerate_inputs_rejected():
    with pytest.raises(ValidationError):
        chi2_quantile(0.5, 0)
    with pytest.raises(ValidationError):
        empirical_quantile([], 0.5)
    with pytest.raises(ValidationError):
        empirical_quantile([1.0, float("nan")], 0.5)
    with pytest.raises(ValidationError):
        weighted_quantile([1.0, 2.0], [1.0], 0.5)
    with pytest.raises(ValidationError):
        weighted_quantile([1.0, 2.0], [-1.0, 1.0], 0.5)
    with pytest.raises(ValidationError):
        weighted_quantile([1.0, 2.0], [0.0, 0.0], 0.5)
