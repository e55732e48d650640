"""Tests for the Fourier-basis rate-function minimization."""

import numpy as np
import pytest
from scipy.integrate import quad, trapezoid

from fracvol.fbm import get_kernel_grid
from fracvol.ritz import (DEFAULT_OPTIONS, FourierCoefficients, RitzOptions,
                          VolFunction, energy, f_functional, g_functional,
                          lambda_star, rate_correlated, rate_uncorrelated)

TANH = VolFunction.tanh(0.1, 0.05)


def random_coeffs(rng, n_modes=4, scale=1.0):
    return FourierCoefficients(
        a0=scale * rng.standard_normal(),
        a=scale * rng.standard_normal(n_modes),
        b=scale * rng.standard_normal(n_modes))


class TestVolFunction:
    def test_tanh_values(self):
        assert TANH(np.array([0.0]))[0] == pytest.approx(0.1)
        assert TANH(np.array([1e9]))[0] == pytest.approx(0.15)

    def test_tanh_positivity_guard(self):
        with pytest.raises(ValueError):
            VolFunction.tanh(0.05, 0.05)

    def test_constant(self):
        v = VolFunction.constant(0.2)
        np.testing.assert_allclose(v(np.linspace(-3, 3, 7)), 0.2)
        with pytest.raises(ValueError):
            VolFunction.constant(0.0)


class TestFourierCoefficients:
    def test_array_roundtrip(self):
        rng = np.random.default_rng(0)
        c = random_coeffs(rng)
        c2 = FourierCoefficients.from_array(c.to_array())
        assert c2.a0 == c.a0
        np.testing.assert_array_equal(c2.a, c.a)
        np.testing.assert_array_equal(c2.b, c.b)

    def test_validation(self):
        with pytest.raises(ValueError):
            FourierCoefficients(0.0, np.zeros(2), np.zeros(3))
        with pytest.raises(ValueError):
            FourierCoefficients.from_array(np.zeros(4))


class TestEnergy:
    def test_against_quadrature(self):
        rng = np.random.default_rng(1)
        for _ in range(3):
            c = random_coeffs(rng)
            ref, _ = quad(lambda s: 0.5 * c.evaluate(np.array([s]))[0] ** 2,
                          0.0, 1.0, limit=200)
            assert energy(c) == pytest.approx(ref, rel=1e-8)

    def test_quadratic_scaling_exact(self):
        rng = np.random.default_rng(2)
        c = random_coeffs(rng)
        e = energy(c)
        for lam in (-2.0, 0.5, 3.0):
            scaled = FourierCoefficients(lam * c.a0, lam * c.a, lam * c.b)
            assert energy(scaled) == lam * lam * e


class TestFunctionals:
    def test_f_at_zero_control(self):
        kg = get_kernel_grid(0.25, 200)
        assert f_functional(kg, TANH, FourierCoefficients.zeros(4)) == \
            pytest.approx(0.01)

    def test_f_against_fine_grid(self):
        # 10x-resolution oracle for a nontrivial control
        c = FourierCoefficients(1.0, np.zeros(4), np.zeros(4))
        coarse = f_functional(get_kernel_grid(0.25, 200), TANH, c)
        fine = f_functional(get_kernel_grid(0.25, 2000), TANH, c)
        # convergence is only O(n^{-1/2}): the path is H-Holder rough
        assert coarse == pytest.approx(fine, rel=3e-3)

    def test_g_at_zero_control(self):
        kg = get_kernel_grid(0.25, 200)
        assert g_functional(kg, TANH, FourierCoefficients.zeros(4)) == 0.0

    def test_g_constant_case(self):
        kg = get_kernel_grid(0.3, 200)
        c = FourierCoefficients(1.7, np.zeros(4), np.zeros(4))
        assert g_functional(kg, VolFunction.constant(0.2), c) == \
            pytest.approx(0.2 * 1.7, rel=1e-12)

    def test_g_sign_flip_with_even_vol(self):
        kg = get_kernel_grid(0.25, 200)
        even_vol = VolFunction(fn=lambda y: 0.1 + np.abs(y),
                               descriptor="even")
        rng = np.random.default_rng(3)
        c = random_coeffs(rng)
        neg = FourierCoefficients(-c.a0, -c.a, -c.b)
        assert g_functional(kg, even_vol, neg) == \
            pytest.approx(-g_functional(kg, even_vol, c), rel=1e-10)

    def test_requires_unit_horizon(self):
        kg = get_kernel_grid(0.25, 50, horizon=0.5)
        with pytest.raises(ValueError):
            f_functional(kg, TANH, FourierCoefficients.zeros(4))


class TestRateUncorrelated:
    def test_zero_moneyness(self):
        kg = get_kernel_grid(0.25, 200)
        r = rate_uncorrelated(kg, TANH, 0.0)
        assert r.value == 0.0
        assert r.converged

    def test_constant_vol_closed_form(self):
        kg = get_kernel_grid(0.25, 200)
        s0 = 0.2
        r = rate_uncorrelated(kg, VolFunction.constant(s0), 0.1)
        assert r.value == pytest.approx(0.1 ** 2 / (2 * s0 ** 2), rel=1e-6)

    def test_symmetry_in_x(self):
        # the uncorrelated objective depends on x only through x^2
        kg = get_kernel_grid(0.25, 200)
        rp = rate_uncorrelated(kg, TANH, 0.07)
        rn = rate_uncorrelated(kg, TANH, -0.07)
        assert rn.value == pytest.approx(rp.value, abs=1e-6)

    def test_bounds_for_tanh_model(self):
        # sigma in [0.05, 0.15] and sigma(0) = 0.1 sandwich the rate
        kg = get_kernel_grid(0.25, 200)
        for x in [0.02, 0.06, 0.1]:
            val = rate_uncorrelated(kg, TANH, x).value
            assert x * x / 0.045 <= val <= x * x / 0.02 + 1e-12

    def test_monotone_in_modes(self):
        kg = get_kernel_grid(0.25, 200)
        v5 = rate_uncorrelated(kg, TANH, 0.08, n_modes=5).value
        v4 = rate_uncorrelated(kg, TANH, 0.08, n_modes=4).value
        assert v5 <= v4 + 1e-9

    def test_result_serializable(self):
        import json
        kg = get_kernel_grid(0.25, 200)
        r = rate_uncorrelated(kg, TANH, 0.05)
        payload = json.dumps(r.to_dict())
        assert "value" in payload


class TestRateCorrelated:
    def test_zero_moneyness_any_rho(self):
        kg = get_kernel_grid(0.25, 200)
        assert rate_correlated(kg, TANH, 0.0, -0.4).value == 0.0

    def test_reduces_to_uncorrelated(self):
        kg = get_kernel_grid(0.25, 200)
        a = rate_correlated(kg, TANH, 0.06, 0.0).value
        b = rate_uncorrelated(kg, TANH, 0.06).value
        assert a == pytest.approx(b, rel=1e-6)

    def test_constant_vol_is_black_scholes(self):
        # for sigma constant the model is Black-Scholes for every rho, so
        # the rate must be x^2 / (2 sigma^2) regardless of correlation
        kg = get_kernel_grid(0.25, 200)
        r = rate_correlated(kg, VolFunction.constant(0.1), 0.05, -0.3)
        assert r.value == pytest.approx(0.05 ** 2 / 0.02, rel=1e-6)

    def test_rho_validation(self):
        kg = get_kernel_grid(0.25, 200)
        with pytest.raises(ValueError):
            rate_correlated(kg, TANH, 0.1, 1.0)

    def test_bad_warm_start_length(self):
        kg = get_kernel_grid(0.25, 200)
        opts = RitzOptions(initial=FourierCoefficients.zeros(3))
        with pytest.raises(ValueError):
            rate_correlated(kg, TANH, 0.1, -0.1, n_modes=4, opts=opts)


class TestCauchySchwarzBound:
    @pytest.mark.parametrize("q", [1, 2, 4])
    def test_rkhs_image_moment_bound(self, q):
        # with energy <= c: int_0^1 |K_H hdot|^q <= (2c)^{q/2} / (1 + Hq)
        h = 0.25
        kg = get_kernel_grid(h, 400)
        rng = np.random.default_rng(17)
        for _ in range(5):
            coeffs = random_coeffs(rng, scale=2.0)
            c = energy(coeffs)
            f = np.concatenate([[0.0],
                                kg.weights @ coeffs.evaluate(kg.quad_nodes)])
            lhs = trapezoid(np.abs(f) ** q, kg.grid.nodes)
            rhs = (2 * c) ** (q / 2) / (1 + h * q)
            assert lhs <= rhs * (1 + 1e-6)


class TestLambdaStar:
    def test_zero(self):
        kg = get_kernel_grid(0.25, 200)
        assert lambda_star(kg, TANH, 0.0, 0.0) == 0.0

    def test_constant_vol(self):
        kg = get_kernel_grid(0.25, 200)
        lam = lambda_star(kg, VolFunction.constant(0.1), 0.0, 0.04)
        assert lam == pytest.approx(0.04 ** 2 / 0.02, rel=1e-5)

    def test_equals_rate_when_monotone(self):
        kg = get_kernel_grid(0.25, 200)
        lam = lambda_star(kg, TANH, 0.0, 0.06)
        assert lam == pytest.approx(rate_uncorrelated(kg, TANH, 0.06).value,
                                    rel=1e-6)

    def test_monotone_in_x(self):
        kg = get_kernel_grid(0.25, 200)
        vals = [lambda_star(kg, TANH, 0.0, x) for x in (0.02, 0.05, 0.08)]
        assert vals[0] < vals[1] < vals[2]

    def test_negative_side(self):
        kg = get_kernel_grid(0.25, 200)
        lam = lambda_star(kg, TANH, 0.0, -0.05)
        assert lam > 0.0
