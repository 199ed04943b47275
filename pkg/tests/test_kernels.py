"""Kernel constants against quadrature oracles."""

import numpy as np
import pytest
from scipy.integrate import quad

from dekernel import BIWEIGHT, EPANECHNIKOV, UNIFORM, KernelSpec
from dekernel.errors import NonPositiveBandwidth, UnsupportedOrder

ALL = [EPANECHNIKOV, BIWEIGHT, UNIFORM]


class TestEvaluate:
    def test_epanechnikov_center(self):
        assert EPANECHNIKOV.evaluate(0.0) == 0.75

    def test_outside_support_is_zero(self):
        assert EPANECHNIKOV.evaluate(1.5) == 0.0
        assert BIWEIGHT.evaluate(-2.0) == 0.0

    def test_uniform_constant(self):
        assert UNIFORM.evaluate(0.3) == 0.5

    @pytest.mark.parametrize("k", ALL, ids=lambda k: k.name)
    def test_symmetry_and_nonnegativity(self, k):
        for w in np.linspace(0.0, 1.5, 151):
            assert k.evaluate(w) >= 0.0
            assert k.evaluate(w) == k.evaluate(-w)


class TestScaledWeight:
    def test_examples(self):
        assert EPANECHNIKOV.scaled_weight(2.0, 0.0) == 0.375
        assert EPANECHNIKOV.scaled_weight(0.5, 1.0) == 0.0
        assert UNIFORM.scaled_weight(4.0, 2.0) == 0.125

    def test_rejects_nonpositive_bandwidth(self):
        with pytest.raises(NonPositiveBandwidth):
            EPANECHNIKOV.scaled_weight(0.0, 0.1)
        with pytest.raises(NonPositiveBandwidth):
            EPANECHNIKOV.scaled_weight(-1.0, 0.1)

    @pytest.mark.parametrize("k", ALL, ids=lambda k: k.name)
    @pytest.mark.parametrize("h", [0.3, 1.0, 2.0, 7.5])
    def test_integrates_to_one(self, k, h):
        val, _ = quad(lambda u: k.scaled_weight(h, u), -h, h, limit=200)
        assert abs(val - 1.0) <= 1e-10


class TestMoments:
    def test_examples(self):
        assert EPANECHNIKOV.moment(1) == 0.0
        assert EPANECHNIKOV.moment(2) == pytest.approx(0.2, abs=1e-15)
        assert EPANECHNIKOV.moment(4) == pytest.approx(3.0 / 35.0, abs=1e-15)

    @pytest.mark.parametrize("k", ALL, ids=lambda k: k.name)
    def test_odd_moments_exactly_zero(self, k):
        for j in (1, 3, 5, 7):
            assert k.moment(j) == 0.0

    @pytest.mark.parametrize("k", ALL, ids=lambda k: k.name)
    def test_closed_forms_match_quadrature(self, k):
        for j in range(9):
            assert abs(k.moment(j) - k.moment_quadrature(j)) <= 1e-12

    def test_normalization(self):
        for k in ALL:
            assert k.moment(0) == 1.0

    def test_order_cap(self):
        with pytest.raises(UnsupportedOrder):
            EPANECHNIKOV.moment(9)


class TestRoughness:
    def test_values_against_quadrature(self):
        for k, expected in [(EPANECHNIKOV, 0.6), (UNIFORM, 0.5), (BIWEIGHT, 5.0 / 7.0)]:
            assert k.roughness() == pytest.approx(expected, abs=1e-15)
            oracle, _ = quad(lambda w: k.evaluate(w) ** 2, -1, 1, limit=200)
            assert abs(k.roughness() - oracle) <= 1e-12


def test_from_name_roundtrip():
    for k in ALL:
        assert KernelSpec.from_name(k.name) == k
    with pytest.raises(ValueError):
        KernelSpec.from_name("gaussian")
