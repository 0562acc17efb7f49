import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sharpineq.errors import DomainError, MaxIterExceeded
from sharpineq.numerics import (gauss_legendre, golden_section, integrate_1d, lambda_product,
                                log_beta, log_gamma, nelder_mead, tanh_sinh_rule)

# Γ(1/4), Γ(3/4) to 20 digits
GAMMA_QUARTER = 3.6256099082219083119
GAMMA_THREE_QUARTERS = 1.2254167024651776451


def test_log_gamma_frozen_values():
    assert log_gamma(0.25) == pytest.approx(math.log(GAMMA_QUARTER), abs=1e-15)
    assert log_gamma(0.75) == pytest.approx(math.log(GAMMA_THREE_QUARTERS), abs=1e-15)
    assert log_gamma(1.0) == 0.0
    assert log_gamma(0.5) == pytest.approx(0.5 * math.log(math.pi), abs=1e-15)


@given(st.floats(1e-6, 1e6))
def test_log_gamma_matches_mpmath(x):
    want = float(mpmath.loggamma(mpmath.mpf(x)))
    assert log_gamma(x) == pytest.approx(want, rel=1e-13, abs=1e-13)


@pytest.mark.parametrize("x", [0.0, -1.0, math.inf, math.nan])
def test_log_gamma_domain(x):
    with pytest.raises(DomainError):
        log_gamma(x)


def test_log_beta():
    assert math.exp(log_beta(2.0, 3.0)) == pytest.approx(1 / 12)


def test_lambda_product_zero_convention():
    assert lambda_product([0.0, 1.0]) == 1.0
    assert lambda_product([0.5, 0.5]) == pytest.approx(0.5)
    with pytest.raises(DomainError):
        lambda_product([-0.1, 1.1])


def test_gauss_legendre_is_exact_on_polynomials():
    rule = gauss_legendre(8, 0.0, 2.0)
    assert rule.integrate(lambda x: x ** 15) == pytest.approx(2 ** 16 / 16, rel=1e-14)


def test_tanh_sinh_rule_weights_sum_to_length():
    rule = tanh_sinh_rule(6, 0.0, 3.0)
    assert float(np.sum(rule.weights)) == pytest.approx(3.0, rel=1e-12)


def test_endpoint_singularity():
    r = integrate_1d(lambda x: x ** -0.5, 0.0, 1.0)
    assert r.converged
    assert r.value == pytest.approx(2.0, rel=1e-12)


def test_half_line_and_real_line():
    assert integrate_1d(lambda x: np.exp(-x), 0.0, math.inf).value == pytest.approx(1.0, rel=1e-12)
    g = integrate_1d(lambda x: np.exp(-x * x), -math.inf, math.inf).value
    assert g == pytest.approx(math.sqrt(math.pi), rel=1e-12)


def test_gauss_legendre_route():
    r = integrate_1d(np.cos, 0.0, 1.0, rule="gauss-legendre")
    assert r.value == pytest.approx(math.sin(1.0), rel=1e-14)


def test_nelder_mead_interior_maximum():
    res = nelder_mead(lambda x: -(x[0] - 1.0) ** 2 - 3 * (x[1] + 2.0) ** 2, [0.0, 0.0],
                      [(-5, 5), (-5, 5)], tol=1e-10)
    assert res.converged
    assert np.allclose(res.argmax, [1.0, -2.0], atol=1e-8)


def test_nelder_mead_respects_the_box():
    res = nelder_mead(lambda x: x[0] + x[1], [0.0, 0.0], [(-1, 2), (-1, 3)], tol=1e-10)
    assert np.allclose(res.argmax, [2.0, 3.0], atol=1e-6)


def test_nelder_mead_budget():
    with pytest.raises(MaxIterExceeded) as e:
        nelder_mead(lambda x: -np.sum(x ** 2), np.ones(4), [(-5, 5)] * 4, tol=1e-300,
                    max_iter=5, restarts=0, raise_on_maxiter=True)
    assert e.value.result is not None


@settings(max_examples=30)
@given(st.floats(-3.0, 3.0))
def test_golden_section_finds_a_parabola_peak(c):
    res = golden_section(lambda x: -(x - c) ** 2, -5.0, 5.0, tol=1e-10)
    assert res.argmax[0] == pytest.approx(c, abs=1e-8)


def test_golden_section_bad_interval():
    with pytest.raises(DomainError):
        golden_section(lambda x: x, 1.0, 1.0)
