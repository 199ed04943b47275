"""Growth-constrained estimator vs its independent verification paths."""

import math

import numpy as np
import pytest

from dekernel import (
    Dataset,
    EPANECHNIKOV,
    FitRequest,
    GaussNewtonOptions,
    QuasiExpModel,
    UNIFORM,
    de_fit_at,
    de_fit_closed_form_exp,
    de_fit_curve,
    de_fit_grid_oracle,
    solution,
)
from dekernel import _corepy
from dekernel.defit import _objective_factory
from dekernel.errors import (
    EmptyBracket,
    EmptyGrid,
    InsufficientLocalData,
    IterateLeftDomain,
    WrongAlpha,
)


def random_linear_config(rng):
    """Well-posed linear-scale fitting problem near the growth law."""
    alpha = rng.uniform(0.3, 1.0)
    lam = rng.uniform(0.4, 1.2)
    model = QuasiExpModel(alpha, lam, rng.uniform(0.5, 2.0))
    n = int(rng.integers(20, 60))
    x = np.sort(rng.uniform(0.0, 3.0, n))
    g = np.array([solution(model, xi) for xi in x])
    y = g + rng.normal(0.0, 0.03 * np.mean(g), n)
    y = np.maximum(y, 0.05 * np.min(g))
    req = FitRequest(
        model=model,
        degree_k=int(rng.integers(1, 4)),
        kernel=EPANECHNIKOV,
        bandwidth_h=rng.uniform(0.5, 1.2),
        scale="linear",
    )
    return Dataset(x, y), rng.uniform(0.8, 2.2), req


def random_log_config(rng):
    """Well-posed log-scale fitting problem near the growth law."""
    alpha = rng.uniform(0.3, 1.0)
    lam = rng.uniform(0.4, 1.2)
    model = QuasiExpModel(alpha, lam, rng.uniform(0.5, 2.0))
    n = int(rng.integers(20, 60))
    x = np.sort(rng.uniform(0.0, 3.0, n))
    G = np.array([math.log(solution(model, xi)) for xi in x])
    z = G + rng.normal(0.0, 0.08, n)
    req = FitRequest(
        model=model,
        degree_k=int(rng.integers(1, 4)),
        kernel=EPANECHNIKOV,
        bandwidth_h=rng.uniform(0.5, 1.2),
        scale="log",
    )
    return Dataset(x, z, scale="log"), rng.uniform(0.8, 2.2), req


class TestSinglePoint:
    def test_single_datum_returns_it(self):
        req = FitRequest(QuasiExpModel(0.6, 0.9), degree_k=2, bandwidth_h=1.0,
                         scale="linear")
        data = Dataset([2.0], [3.7])
        res = de_fit_at(data, 2.0, req)
        assert res.estimate == pytest.approx(3.7, abs=1e-12)
        assert res.converged

    def test_noiseless_half_alpha_degree2_is_exact(self):
        # third and higher derivatives vanish at alpha = 1/2, so the
        # degree-2 expansion is the exact trajectory
        model = QuasiExpModel(0.5, 1.0, 1.0)
        x = np.linspace(0.5, 3.5, 61)
        y = np.array([solution(model, xi) for xi in x])
        req = FitRequest(model, degree_k=2, bandwidth_h=0.5, scale="linear")
        for x0 in (1.0, 2.0, 3.0):
            res = de_fit_at(Dataset(x, y), x0, req)
            assert abs(res.estimate - solution(model, x0)) <= 1e-8

    def test_insufficient_data_raises(self):
        req = FitRequest(QuasiExpModel(0.5, 1.0), bandwidth_h=0.1, scale="linear")
        with pytest.raises(InsufficientLocalData):
            de_fit_at(Dataset([0.0, 4.0], [1.0, 2.0]), 2.0, req)

    def test_negative_data_leaves_linear_domain(self):
        req = FitRequest(QuasiExpModel(0.5, 1.0), bandwidth_h=2.0, scale="linear")
        data = Dataset([0.0, 1.0, 2.0], [-1.0, -2.0, -0.5])
        with pytest.raises(IterateLeftDomain):
            de_fit_at(data, 1.0, req)

    def test_warm_start_independence(self):
        rng = np.random.default_rng(21)
        data, x0, req = random_log_config(rng)
        base = de_fit_at(data, x0, req)
        assert base.converged
        for factor in (0.8, 1.2):
            res = de_fit_at(data, x0, req, warm_start=base.estimate * factor + 0.1)
            assert abs(res.estimate - base.estimate) <= 1e-8 * max(1.0, abs(base.estimate))

    def test_monotone_objective_descent(self):
        rng = np.random.default_rng(33)
        for _ in range(20):
            maker = random_linear_config if rng.uniform() < 0.5 else random_log_config
            data, x0, req = maker(rng)
            trace = []
            _corepy.de_fit_point(
                data.x, data.working_values(req.scale), x0,
                req.kernel.backend_id, req.bandwidth_h,
                req.model.alpha, req.model.lam, req.degree_k,
                req.scale == "log", trace=trace,
            )
            assert len(trace) >= 1
            assert all(b <= a for a, b in zip(trace, trace[1:]))


class TestClosedFormExponential:
    def test_lambda_zero_limit_not_representable(self):
        # lam = 0 is rejected at model construction
        with pytest.raises(ValueError):
            QuasiExpModel(1.0, 0.0)

    def test_tiny_lambda_reduces_to_local_mean(self):
        req = FitRequest(QuasiExpModel(1.0, 1e-14), degree_k=1,
                         kernel=UNIFORM, bandwidth_h=5.0, scale="linear")
        y = [1.0, 2.0, 6.0]
        est = de_fit_closed_form_exp(Dataset([0.0, 1.0, 2.0], y), 1.0, req)
        assert est == pytest.approx(np.mean(y), rel=1e-9)

    def test_two_symmetric_points_hand_ratio(self):
        # c = 1 + lam*dx at k=1; hand algebra for dx = -1, +1 with lam = 1
        req = FitRequest(QuasiExpModel(1.0, 1.0), degree_k=1,
                         kernel=UNIFORM, bandwidth_h=2.0, scale="linear")
        data = Dataset([1.0, 3.0], [1.0, 5.0])
        # weights equal; c = (0, 2) -> estimate = (5*2) / (2*2) = 2.5
        est = de_fit_closed_form_exp(data, 2.0, req)
        assert est == pytest.approx(2.5, rel=1e-14)

    def test_wrong_alpha_rejected(self):
        req = FitRequest(QuasiExpModel(0.9, 1.0), degree_k=1, bandwidth_h=1.0,
                         scale="linear")
        with pytest.raises(WrongAlpha):
            de_fit_closed_form_exp(Dataset([0.0], [1.0]), 0.0, req)

    def test_gauss_newton_agrees_over_random_configs(self):
        rng = np.random.default_rng(101)
        for _ in range(50):
            lam = rng.uniform(-0.8, 0.8)
            if abs(lam) < 0.05:
                lam = 0.3
            model = QuasiExpModel(1.0, lam, 1.0)
            n = int(rng.integers(10, 40))
            x = np.sort(rng.uniform(0.0, 3.0, n))
            y = np.exp(lam * x) * rng.uniform(0.8, 1.2, n)
            req = FitRequest(model, degree_k=int(rng.integers(1, 4)),
                             bandwidth_h=rng.uniform(0.5, 1.5), scale="linear")
            x0 = rng.uniform(0.5, 2.5)
            closed = de_fit_closed_form_exp(Dataset(x, y), x0, req)
            if closed <= 0.0:
                continue  # linear-scale iteration is restricted to positive levels
            gn = de_fit_at(Dataset(x, y), x0, req)
            assert gn.converged
            assert abs(gn.estimate - closed) <= 1e-10 * max(1.0, abs(closed))


class TestGridOracle:
    def test_single_datum(self):
        req = FitRequest(QuasiExpModel(0.7, 1.1), degree_k=2, bandwidth_h=1.0,
                         scale="linear")
        est = de_fit_grid_oracle(Dataset([1.0], [2.2]), 1.0, req, 0.5, 5.0, 1000)
        assert est == pytest.approx(2.2, abs=1e-8)

    def test_local_minimality(self):
        rng = np.random.default_rng(55)
        data, x0, req = random_linear_config(rng)
        est = de_fit_grid_oracle(data, x0, req, 0.05, 40.0, 2000)
        objective = _objective_factory(data, x0, req)
        f0 = objective(est)
        for eps in (1e-5, -1e-5):
            assert f0 <= objective(est * (1.0 + eps)) + 1e-12

    def test_empty_bracket_rejected(self):
        req = FitRequest(QuasiExpModel(0.5, 1.0), bandwidth_h=1.0, scale="linear")
        with pytest.raises(EmptyBracket):
            de_fit_grid_oracle(Dataset([1.0], [2.0]), 1.0, req, 3.0, 3.0, 1000)
        with pytest.raises(ValueError):
            de_fit_grid_oracle(Dataset([1.0], [2.0]), 1.0, req, 0.1, 3.0, 10)

    @pytest.mark.parametrize("scale", ["linear", "log"])
    def test_gauss_newton_matches_oracle(self, scale):
        rng = np.random.default_rng(77 if scale == "linear" else 78)
        maker = random_linear_config if scale == "linear" else random_log_config
        for _ in range(50):
            data, x0, req = maker(rng)
            try:
                gn = de_fit_at(data, x0, req)
            except InsufficientLocalData:
                continue
            assert gn.converged
            z = data.working_values(scale)
            span = float(np.max(z) - np.min(z)) + 1.0
            if scale == "linear":
                lo, hi = max(1e-8, 0.05 * float(np.min(z))), float(np.max(z)) + span
            else:
                lo, hi = float(np.min(z)) - span, float(np.max(z)) + span
            oracle = de_fit_grid_oracle(data, x0, req, lo, hi, 2000)
            assert abs(gn.estimate - oracle) <= 1e-6


class TestCurve:
    def test_log_scale_prediction_terms(self):
        # degree-1 and degree-2 expansion shapes on the log scale
        from dekernel import taylor_predict_log

        model = QuasiExpModel(0.6, 0.8)
        G, dx = 0.4, 0.35
        p1 = taylor_predict_log(model, G, dx, 1)
        assert p1 - G == pytest.approx(
            model.lam * math.exp((model.alpha - 1.0) * G) * dx, rel=1e-14
        )
        p2 = taylor_predict_log(model, G, dx, 2)
        second = 0.5 * model.lam ** 2 * (model.alpha - 1.0) * math.exp(
            2.0 * (model.alpha - 1.0) * G
        ) * dx ** 2
        assert p2 - p1 == pytest.approx(second, rel=1e-12)

    def test_curve_on_noiseless_log_data(self):
        # log-scale truncation bias scales like h**4 at even degree, so a
        # modest window keeps noiseless fits within a tight band
        model = QuasiExpModel(0.5, 1.0, 1.0)
        x = np.linspace(0.5, 3.5, 121)
        G = np.log([solution(model, xi) for xi in x])
        grid = np.linspace(1.0, 3.0, 9)
        truth = np.log([solution(model, g) for g in grid])
        req = FitRequest(model, degree_k=2, bandwidth_h=0.4, scale="log")
        curve = de_fit_curve(Dataset(x, G, scale="log"), grid, req)
        assert curve.all_ok
        err_small = np.max(np.abs(curve.values - truth))
        assert err_small <= 1e-4
        req2 = FitRequest(model, degree_k=2, bandwidth_h=0.8, scale="log")
        err_large = np.max(np.abs(
            de_fit_curve(Dataset(x, G, scale="log"), grid, req2).values - truth))
        assert err_small < err_large / 4.0

    def test_partial_failures_recorded(self):
        model = QuasiExpModel(0.5, 1.0, 1.0)
        x = np.array([0.0, 0.1, 3.0])
        y = np.array([1.0, 1.1, 4.0])
        req = FitRequest(model, degree_k=1, bandwidth_h=0.3, scale="linear")
        curve = de_fit_curve(Dataset(x, y), [0.05, 1.5, 3.0], req)
        assert curve.status[1] == "insufficient_data"
        assert np.isnan(curve.values[1])
        assert curve.status[0] == "ok" and curve.status[2] == "ok"

    def test_empty_grid(self):
        req = FitRequest(QuasiExpModel(0.5, 1.0), bandwidth_h=1.0, scale="linear")
        with pytest.raises(EmptyGrid):
            de_fit_curve(Dataset([1.0], [1.0]), [], req)

    def test_gauss_newton_budget_flagging(self):
        rng = np.random.default_rng(3)
        data, x0, req = random_log_config(rng)
        starved = FitRequest(
            req.model, req.degree_k, req.kernel, req.bandwidth_h, "log",
            GaussNewtonOptions(max_iter=1, rel_tol=1e-14),
        )
        res = de_fit_at(data, x0, starved)
        assert isinstance(res.estimate, float)
