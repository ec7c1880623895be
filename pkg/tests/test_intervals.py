import math

import numpy as np
import pytest

from nonreg import EstimationError, ValidationError
from nonreg.data import ClassDataset, DecisionDataset
from nonreg.fit import CoefEstimate, fit_least_squares, fit_q_model
from nonreg.intervals import (
    EllipsoidSet,
    Interval,
    SearchConfig,
    adaptive_projection_interval,
    fixed_beta_interval,
    projection_interval,
    value_fixed_interval,
    value_projection_interval,
    w_interval,
    wald_ellipsoid,
)
from nonreg.metrics import NearBoundaryPartition, boundary_test_statistics, default_lambda
from nonreg.models import DecisionGenModel, MixtureModel
from nonreg.quantiles import chi2_quantile, normal_quantile


def _class_data(seed, n=60):
    return MixtureModel(0.25).sample(n, seed)


def test_interval_type_invariants():
    iv = Interval(0.2, 0.7)
    assert iv.width == pytest.approx(0.5)
    assert iv.contains(0.2) and iv.contains(0.7) and not iv.contains(0.71)
    with pytest.raises(ValidationError):
        Interval(0.5, 0.4)
    with pytest.raises(ValidationError):
        Interval(0.0, float("inf"))


def test_fixed_interval_degenerate_at_zero_error():
    data = ClassDataset([[1.0, 1.0], [1.0, -1.0]], [1.0, -1.0])
    iv = fixed_beta_interval(data, [0.0, 1.0], 0.05)
    assert (iv.lo, iv.hi) == (0.0, 0.0)


def test_fixed_interval_half_error_hand_value():
    # n=100 with exactly 50 strict errors at this coefficient
    x = np.ones(100)
    y = np.r_[np.ones(50), -np.ones(50)]
    data = ClassDataset(np.column_stack([np.ones(100), x]), y)
    iv = fixed_beta_interval(data, [0.0, 1.0], 0.05)
    assert iv.lo == pytest.approx(0.402, abs=1e-3)
    assert iv.hi == pytest.approx(0.598, abs=1e-3)
    z = normal_quantile(0.975)
    assert iv.lo == pytest.approx(0.5 - z * 0.05, abs=1e-12)


def test_fixed_interval_truncates_to_unit_range():
    data = ClassDataset([[1.0, 1.0]] * 10, [1.0] * 9 + [-1.0])
    iv = fixed_beta_interval(data, [0.0, -1.0], 0.10)  # 9 of 10 errors
    assert iv.lo >= 0.0
    assert iv.hi == 1.0  # untruncated endpoint 0.9 + 1.645*0.3/sqrt(10) exceeds one


def test_wald_ellipsoid_radius_hand_value():
    est = CoefEstimate([0.3], np.eye(1), 100)
    ell = wald_ellipsoid(est, 0.05)
    assert ell.radius2 == pytest.approx(chi2_quantile(0.95, 1), abs=1e-12)
    r = math.sqrt(3.8415) / 10.0
    assert ell.contains([0.3 + 0.99 * r]) and ell.contains([0.3 - 0.99 * r])
    assert not ell.contains([0.3 + 1.01 * r])
    assert ell.mahalanobis2([0.3]) == 0.0


def test_wald_ellipsoid_rejects_singular_covariance():
    est = CoefEstimate([0.0, 0.0], np.diag([1.0, 0.0]), 50)
    with pytest.raises(EstimationError):
        wald_ellipsoid(est, 0.05)
    with pytest.raises(ValidationError):
        wald_ellipsoid(CoefEstimate([0.0], np.eye(1), 50), 1.5)


def test_ellipsoid_set_validation():
    with pytest.raises(ValidationError):
        EllipsoidSet(np.zeros(2), -np.eye(2), 1.0, 0.05)
    with pytest.raises(ValidationError):
        EllipsoidSet(np.zeros(2), np.eye(2), 0.0, 0.05)
    with pytest.raises(ValidationError):
        EllipsoidSet(np.zeros(2), np.array([[1.0, 0.5], [0.0, 1.0]]), 1.0, 0.05)


def test_projection_contains_center_interval():
    data = _class_data(0)
    est = fit_least_squares(data)
    proj = projection_interval(data, est, omega=0.10, rng=1)
    center = fixed_beta_interval(data, est.beta, 0.05)
    assert proj.lo <= center.lo and proj.hi >= center.hi


def test_projection_collapses_when_ellipsoid_degenerates():
    # eta near one shrinks the ellipsoid radius toward zero, so the union
    # collapses onto the center's own interval; alpha + eta must stay < 1
    data = _class_data(1)
    est = fit_least_squares(data)
    alpha, eta = 5e-10, 1 - 1e-9
    tight = projection_interval(data, est, alpha=alpha, eta=eta, rng=1)
    center = fixed_beta_interval(data, est.beta, alpha)
    assert tight.lo == pytest.approx(center.lo, abs=1e-6)
    assert tight.hi == pytest.approx(center.hi, abs=1e-6)


def test_projection_split_monotone_in_alpha():
    data = _class_data(2)
    est = fit_least_squares(data)
    wide = projection_interval(data, est, alpha=0.02, eta=0.05, rng=3)
    narrow = projection_interval(data, est, alpha=0.08, eta=0.05, rng=3)
    assert wide.lo <= narrow.lo + 1e-12
    assert wide.hi >= narrow.hi - 1e-12


def test_projection_envelope_monotone_in_search_set():
    data = _class_data(3)
    est = fit_least_squares(data)
    # identical stochastic candidates, the larger search only adds points
    small = projection_interval(
        data, est, omega=0.10, search=SearchConfig(0, 0, exact_low_dim=False), rng=4
    )
    big = projection_interval(data, est, omega=0.10, rng=4)
    assert big.lo <= small.lo and big.hi >= small.hi


def test_exact_plane_search_contains_dense_sampling():
    data = _class_data(4, n=40)
    est = fit_least_squares(data)
    dense = projection_interval(
        data, est, omega=0.10, search=SearchConfig(20000, 2000, exact_low_dim=False), rng=5
    )
    exact = projection_interval(
        data, est, omega=0.10, search=SearchConfig(0, 0, exact_low_dim=True), rng=5
    )
    assert exact.lo <= dense.lo + 1e-12
    assert exact.hi >= dense.hi - 1e-12


def test_split_validation():
    data = _class_data(5)
    est = fit_least_squares(data)
    with pytest.raises(ValidationError):
        projection_interval(data, est)
    with pytest.raises(ValidationError):
        projection_interval(data, est, omega=0.1, alpha=0.05, eta=0.2)
    with pytest.raises(ValidationError):
        projection_interval(data, est, omega=1.2)


def test_w_interval_no_near_matches_fixed_shape():
    data = _class_data(6)
    est = fit_least_squares(data)
    part = boundary_test_statistics(data, est, 0.0)
    assert part.n_near == 0
    got = w_interval(data, est, est.beta, 0.10, partition=part)
    want = fixed_beta_interval(data, est.beta, 0.10)
    assert got.lo == pytest.approx(want.lo, abs=1e-12)
    assert got.hi == pytest.approx(want.hi, abs=1e-12)


def test_w_interval_all_near_scores_candidate_only():
    data = _class_data(7)
    est = fit_least_squares(data)
    part = boundary_test_statistics(data, est, np.inf)
    other = np.array([0.5, -0.2])
    got = w_interval(data, est, other, 0.10, partition=part)
    want = fixed_beta_interval(data, other, 0.10)
    assert got.lo == pytest.approx(want.lo, abs=1e-12)
    assert got.hi == pytest.approx(want.hi, abs=1e-12)


def test_w_interval_four_point_hand_case():
    data = ClassDataset(
        [[1.0, 1.0], [1.0, -1.0], [1.0, 2.0], [1.0, -2.0]], [1.0, 1.0, -1.0, -1.0]
    )
    part = NearBoundaryPartition(
        np.array([0, 1]), np.array([2, 3]), 0.5, np.array([0.1, 0.2, 3.0, 4.0])
    )
    est = CoefEstimate([0.0, 1.0], np.eye(2), 4)
    iv = w_interval(data, est, [1.0, 0.0], 0.10, partition=part)
    z = normal_quantile(0.95)
    half = z * math.sqrt(0.1875) / 2.0
    assert iv.lo == pytest.approx(max(0.0, 0.25 - half), abs=1e-12)
    assert iv.hi == pytest.approx(0.25 + half, abs=1e-12)


def test_adaptive_no_near_collapses_to_single_w():
    data = _class_data(8)
    est = fit_least_squares(data)
    adaptive = adaptive_projection_interval(data, est, omega=0.10, lam=0.0, rng=9)
    single = w_interval(
        data, est, est.beta, 0.05, partition=boundary_test_statistics(data, est, 0.0)
    )
    assert adaptive.lo == pytest.approx(single.lo, abs=1e-12)
    assert adaptive.hi == pytest.approx(single.hi, abs=1e-12)


def test_adaptive_contained_in_unit_interval_and_ordered():
    data = _class_data(9, n=120)
    est = fit_least_squares(data)
    iv = adaptive_projection_interval(data, est, omega=0.10, rng=10)
    assert 0.0 <= iv.lo <= iv.hi <= 1.0


def _decision_data(seed, n=80, theta=(0.25, -0.5)):
    return DecisionGenModel(theta=theta, mu=(1.0, 0.5, 0.0)).sample(n, seed)


def test_value_fixed_interval_center_and_scale():
    n = 16
    X0 = np.column_stack([np.ones(n), np.linspace(-2, 2, n)])
    a = np.r_[np.ones(8), -np.ones(8)]
    y = np.full(n, 3.0)
    data = DecisionDataset(X0, X0.copy(), a, y, np.full(n, 0.5))
    beta1 = [0.0, 1.0]
    from nonreg.fit import classify

    match_rate = float(np.mean(classify(beta1, data.X1) == a))
    iv = value_fixed_interval(data, beta1, 0.10)
    center = 0.5 * (iv.lo + iv.hi)
    assert center == pytest.approx(3.0 * match_rate * 2.0, abs=1e-12)


def test_value_fixed_interval_zero_length_when_terms_equal():
    n = 6
    X0 = np.column_stack([np.ones(n), np.ones(n)])
    data = DecisionDataset(X0, X0.copy(), np.ones(n), np.full(n, 2.0), np.full(n, 0.5))
    iv = value_fixed_interval(data, [1.0, 0.0], 0.10)
    assert iv.lo == iv.hi == pytest.approx(4.0, abs=1e-12)


def test_value_intervals_are_not_truncated():
    # strongly negative outcomes push the whole interval below zero
    n = 12
    X0 = np.column_stack([np.ones(n), np.linspace(-1, 1, n)])
    data = DecisionDataset(X0, X0.copy(), np.ones(n), np.full(n, -5.0), np.full(n, 0.5))
    iv = value_fixed_interval(data, [1.0, 0.0], 0.10)
    assert iv.hi < 0.0


def test_value_projection_contains_center_interval():
    data = _decision_data(11)
    qest = fit_q_model(data)
    proj = value_projection_interval(data, qest, omega=0.10, rng=12)
    center = value_fixed_interval(data, qest.beta1, 0.05)
    assert proj.lo <= center.lo + 1e-12
    assert proj.hi >= center.hi - 1e-12


def test_value_projection_width_shrinks_with_n():
    small = _decision_data(13, n=200, theta=(0.5, 0.5))
    large = _decision_data(13, n=2000, theta=(0.5, 0.5))
    w_small = value_projection_interval(small, fit_q_model(small), omega=0.10, rng=14).width
    w_large = value_projection_interval(large, fit_q_model(large), omega=0.10, rng=14).width
    assert w_large < w_small


def test_value_projection_dimension_check():
    data = _decision_data(15)
    other = _decision_data(16)
    qest = fit_q_model(other)
    trimmed = DecisionDataset(data.X0, data.X1[:, :1], data.a, data.y, data.pi)
    with pytest.raises(ValidationError):
        value_projection_interval(trimmed, qest, omega=0.10)
