"""Local polynomial baselines: exactness, locality, failure contracts."""

import numpy as np
import pytest

from dekernel import Dataset, EPANECHNIKOV, UNIFORM, local_poly_curve, local_poly_fit_at
from dekernel.errors import EmptyGrid, InsufficientLocalData, SingularDesign


class TestFitAt:
    def test_line_through_two_points(self):
        data = Dataset([0.0, 1.0], [1.0, 3.0])
        est, coeffs, n_eff = local_poly_fit_at(data, 0.5, 1, UNIFORM, 2.0)
        assert est == pytest.approx(2.0, abs=1e-12)
        assert coeffs[1] == pytest.approx(2.0, abs=1e-12)  # slope
        assert n_eff == 2

    def test_degree_zero_uniform_weights_is_mean(self):
        y = [1.0, 4.0, 2.5, 3.5]
        data = Dataset([0.0, 0.3, 0.6, 0.9], y)
        est, _, _ = local_poly_fit_at(data, 0.45, 0, UNIFORM, 10.0)
        assert est == pytest.approx(np.mean(y), rel=1e-14)

    @pytest.mark.parametrize("degree", [0, 1, 2, 3])
    def test_polynomial_reproduction(self, degree):
        rng = np.random.default_rng(11)
        coefs = rng.normal(size=degree + 1)
        x = np.linspace(0.0, 2.0, 25)
        y = np.polyval(coefs, x)
        data = Dataset(x, y)
        for x0 in (0.3, 1.0, 1.7):
            est, _, _ = local_poly_fit_at(data, x0, degree, EPANECHNIKOV, 0.8)
            assert abs(est - np.polyval(coefs, x0)) <= 1e-10

    def test_derivative_coefficients(self):
        # quadratic data: j! * coeffs[j] estimates the j-th derivative
        x = np.linspace(-1.0, 1.0, 21)
        y = 2.0 + 3.0 * x + 1.5 * x ** 2
        est, coeffs, _ = local_poly_fit_at(Dataset(x, y), 0.0, 2, EPANECHNIKOV, 0.9)
        assert est == pytest.approx(2.0, abs=1e-10)
        assert coeffs[1] == pytest.approx(3.0, abs=1e-9)
        assert 2.0 * coeffs[2] == pytest.approx(3.0, abs=1e-8)

    def test_weight_locality_bit_identical(self):
        x = np.linspace(0.0, 10.0, 40)
        rng = np.random.default_rng(5)
        y = np.sin(x) + rng.normal(0, 0.1, 40)
        data = Dataset(x, y)
        est, _, _ = local_poly_fit_at(data, 5.0, 1, EPANECHNIKOV, 1.0)
        y2 = y.copy()
        y2[np.abs(x - 5.0) >= 1.0] += 100.0  # zero-weight points only
        est2, _, _ = local_poly_fit_at(Dataset(x, y2), 5.0, 1, EPANECHNIKOV, 1.0)
        assert est == est2

    def test_constant_shift_invariance(self):
        rng = np.random.default_rng(8)
        x = np.sort(rng.uniform(0, 4, 30))
        y = rng.normal(size=30)
        c = 7.25
        for degree in (0, 1, 2):
            a, _, _ = local_poly_fit_at(Dataset(x, y), 2.0, degree, EPANECHNIKOV, 1.2)
            b, _, _ = local_poly_fit_at(Dataset(x, y + c), 2.0, degree, EPANECHNIKOV, 1.2)
            assert b - a == pytest.approx(c, rel=1e-12)

    def test_insufficient_distinct_points(self):
        data = Dataset([1.0, 1.0], [0.5, 1.5])  # duplicates count once
        with pytest.raises(InsufficientLocalData):
            local_poly_fit_at(data, 1.0, 1, EPANECHNIKOV, 0.5)
        with pytest.raises(InsufficientLocalData):
            local_poly_fit_at(Dataset([0.0, 5.0], [1.0, 2.0]), 0.1, 1, EPANECHNIKOV, 1.0)

    def test_singular_design_detected(self):
        # distinct but numerically coincident design points
        data = Dataset([1.0, 1.0 + 1e-14, 2.0], [0.5, 1.5, 1.0])
        with pytest.raises(SingularDesign):
            local_poly_fit_at(data, 1.0, 1, UNIFORM, 0.5)


class TestCurve:
    def test_linear_data_exact_on_design(self):
        x = np.linspace(0.0, 3.0, 10)
        y = 1.0 + 2.0 * x
        curve = local_poly_curve(Dataset(x, y), x, 1, EPANECHNIKOV, 1.0)
        assert curve.all_ok
        np.testing.assert_allclose(curve.values, y, atol=1e-11)

    def test_partial_failure_flagged(self):
        x = np.array([0.0, 0.1, 5.0, 5.1])
        y = np.array([1.0, 1.1, 2.0, 2.1])
        curve = local_poly_curve(Dataset(x, y), [0.05, 2.5, 5.05], 1, EPANECHNIKOV, 0.3)
        assert curve.status == ["ok", "insufficient_data", "ok"]
        assert np.isnan(curve.values[1]) and not curve.converged[1]
        assert curve.n_failed == 1

    def test_constant_data_any_degree(self):
        x = np.linspace(0.0, 5.0, 12)
        data = Dataset(x, np.full(12, 3.25))
        for degree in (0, 1, 2):
            curve = local_poly_curve(data, [1.0, 2.5, 4.0], degree, EPANECHNIKOV, 2.0)
            np.testing.assert_allclose(curve.values, 3.25, rtol=1e-12)

    def test_empty_grid_rejected(self):
        data = Dataset([0.0, 1.0], [1.0, 2.0])
        with pytest.raises(EmptyGrid):
            local_poly_curve(data, [], 1, EPANECHNIKOV, 1.0)
