import math

import numpy as np
import pytest

from src.fem.quadrature import assembly_rule, gauss_legendre, integrate


class TestGaussLegendre:
    @pytest.mark.parametrize("k", [1, 2, 5, 9])
    def test_weights_sum_to_reference_length(self, k):
        rule = gauss_legendre(k)
        assert rule.weights.sum() == pytest.approx(2.0, rel=1e-14)
        assert np.all(rule.weights > 0)
        assert rule.exact_degree == 2 * k - 1

    @pytest.mark.parametrize("k", [1, 3, 6, 10])
    def test_exact_on_monomials(self, k):
        rule = gauss_legendre(k)
        for m in range(2 * k):
            value = integrate(rule, (0.0, 1.0), lambda x, m=m: x**m)
            assert value == pytest.approx(1.0 / (m + 1), rel=1e-13)

    def test_rejects_empty_rule(self):
        with pytest.raises(ValueError):
            gauss_legendre(0)

    def test_assembly_rule_size(self):
        assert assembly_rule(0).size == 5
        assert assembly_rule(2).size == 7


class TestIntegrate:
    def test_constant(self):
        assert integrate(gauss_legendre(1), (0.0, 1.0), lambda x: 1.0) == pytest.approx(1.0)

    @pytest.mark.parametrize("h", [1.0, 0.1, 1e-3])
    def test_linear(self, h):
        assert integrate(gauss_legendre(2), (0.0, h), lambda x: x) == pytest.approx(h**2 / 2, rel=1e-14)

    def test_sine(self):
        value = integrate(gauss_legendre(8), (0.0, 1.0), lambda x: np.sin(np.pi * x))
        assert abs(value - 2.0 / math.pi) < 1e-12
