import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sharpineq import constants as K
from sharpineq.errors import ConstraintViolation, RangeViolation
from sharpineq.exponents import Family, derive
from sharpineq.functionals import ExtremalFamily, diag_young_ratio
from sharpineq.montecarlo import riesz_composition_constant
from sharpineq.operators import exp_density_ratio, hardy_ratio, log_grid, sample, uniform_real_grid

GAMMA_QUARTER = 3.6256099082219083119
GAMMA_THREE_QUARTERS = 1.2254167024651776451


def mp_bliss(p, q):
    p, q = mpmath.mpf(p), mpmath.mpf(q)
    r = 1 / (1 / p - 1 / q)
    pp, qp = p / (p - 1), q / (q - 1)
    br = (q / r) * mpmath.gamma(r) / (mpmath.gamma(r / q) * mpmath.gamma(r / qp))
    return float((pp / q) ** (1 / q) * br ** (1 / r))


def test_frozen_values():
    assert K.hardy_constant(2.0).value == 2.0
    assert K.bliss_constant(2.0, 4.0).value == pytest.approx(1.5 ** 0.25, rel=1e-14)
    assert K.hilbert_constant(2.0).value == math.pi
    assert K.trace_l2_constant(4, 2.0).value == 1.0
    assert K.tensor_hardy_constant(2.0).value == 4.0
    y = K.young_l2_constant(dict(q=2.0, m=2, n=1, s=(4 / 3, 4 / 3)))
    assert y.value == pytest.approx((16 / 27) ** 0.25, rel=1e-14)
    assert K.exp_density_constant(1.5).value == pytest.approx(1.0357442, rel=1e-6)
    assert K.diag_young_constant(dict(p=2.0, m=2, n=1)).value == pytest.approx(1.0, rel=1e-12)
    assert K.diag_young_constant(dict(p=3.0, m=3, n=1)).value == pytest.approx(
        math.sqrt(0.75), rel=1e-12)
    assert K.hilbert_trace_constant(2).value == pytest.approx(
        2 * math.sqrt(math.pi ** 2 / 6), rel=1e-13)


@given(st.floats(1.01, 20.0))
def test_hardy_constant(p):
    assert K.hardy_constant(p).value == pytest.approx(p / (p - 1))


@given(st.floats(1.05, 6.0), st.floats(1.05, 3.0))
def test_bliss_matches_mpmath(p, ratio):
    q = p * ratio
    assert K.bliss_constant(p, q).value == pytest.approx(mp_bliss(p, q), rel=1e-12)


@pytest.mark.parametrize("p,q", [(2.0, 4.0), (1.5, 3.0), (3.0, 5.0), (2.0, 3.0)])
def test_bliss_attained_on_the_grid(p, q):
    grid = log_grid(1e-30, 1e30, 2**16)
    got = hardy_ratio(sample(grid, ExtremalFamily.bliss(p, q)), p, q)
    assert got == pytest.approx(K.bliss_constant(p, q).value, rel=1e-5)


def test_bliss_range():
    with pytest.raises(RangeViolation):
        K.bliss_constant(4.0, 2.0)


@pytest.mark.parametrize("p", [1.2, 1.5, 1.8])
def test_exp_density_attained_at_cosh_profile(p):
    fam = ExtremalFamily.cosh_power(p)
    scale = fam.params[0]
    grid = uniform_real_grid(60.0 / min(scale, 1.0), min(0.01, 0.05 / scale))
    got = exp_density_ratio(sample(grid, fam), p)
    assert got == pytest.approx(K.exp_density_constant(p).value, rel=1e-4)


def test_exp_density_formula_in_mpmath():
    p = mpmath.mpf(1.5)
    pp = p / (p - 1)
    br = mpmath.gamma(2 * p / (2 - p)) / (mpmath.gamma(2 / (2 - p)) * mpmath.gamma(p / (2 - p)))
    want = float(pp ** (2 / p - 2) * br ** (2 / p - 1))
    assert K.exp_density_constant(1.5).value == pytest.approx(want, rel=1e-13)
    # the two written forms differ by (p'/2)^{2/p} p'^{2 − 2/p} = 4^{−1/p} p'^2
    ratio = K.exp_density_constant_printed(1.5).value / K.exp_density_constant(1.5).value
    assert ratio == pytest.approx(4 ** (-1 / 1.5) * 9.0, rel=1e-13)


def test_exp_density_range():
    with pytest.raises(RangeViolation):
        K.exp_density_constant(2.0)


@pytest.mark.parametrize("m", [2, 3, 4, 7])
def test_trace_l2_at_q_2(m):
    assert K.trace_l2_constant(m, 2.0).value == pytest.approx(2 / math.sqrt(m))


def test_trace_l2_above_2_sits_below_the_printed_bound():
    for q in (3.0, 4.0, 6.0):
        assert K.trace_l2_constant(2, q).value < K.trace_l2_constant_printed(2, q).value


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0, 7.0])
def test_hilbert_is_a_beta_value(p):
    want = float(mpmath.gamma(1 / mpmath.mpf(p)) * mpmath.gamma(1 - 1 / mpmath.mpf(p)))
    assert K.hilbert_constant(p).value == pytest.approx(want, rel=1e-14)


@pytest.mark.parametrize("m", [2, 3, 4])
def test_hilbert_trace_integral(m):
    want = float(mpmath.quad(lambda x: (x / mpmath.sinh(x)) ** m, [0, 1, mpmath.inf]))
    c = K.hilbert_trace_constant(m)
    assert c.extras["integral"] == pytest.approx(want, rel=1e-12)
    assert c.value == pytest.approx(2 * math.sqrt(want), rel=1e-12)


def test_lieb_constant():
    # λ → 0 is ‖f‖_1² ≤ ‖f‖_1²
    assert K.lieb_hls_constant(3, 1e-12) == pytest.approx(1.0, abs=1e-10)
    n, lam = 1, mpmath.mpf(2) / 3
    want = (mpmath.pi ** (lam / 2) * mpmath.gamma((n - lam) / 2) / mpmath.gamma(n - lam / 2)
            * (mpmath.gamma(mpmath.mpf(n) / 2) / mpmath.gamma(n)) ** (-1 + lam / n))
    assert K.lieb_hls_constant(1, 2 / 3) == pytest.approx(float(want), rel=1e-13)


def test_mhls_constant_matches_dyson():
    t = derive(Family.DiagMHLS, p=2.0, m=3, n=1)
    c = K.diag_mhls_constant(t, 200_000, 3)
    d = GAMMA_QUARTER / GAMMA_THREE_QUARTERS ** 3
    assert math.exp(K.mhls_log_prefactor(1, 3, 2.0)) == pytest.approx((2 * math.pi) ** 1.5)
    assert abs(c.extras["D"] - d) <= 4 * c.extras["D_stderr"]
    assert abs(c.value - (2 * math.pi) ** 1.5 * d) <= 4 * c.uncertainty
    assert c.seed == 3 and c.samples == 200_000


def test_trace_fractional_single_block_is_a_riesz_composition():
    t = derive(Family.TraceFractional, q=3.0, m=1, n=1)
    c = K.trace_fractional_constant(t, 200_000, 4)
    lam = t.n - t.alpha
    b = riesz_composition_constant(1, lam, lam)
    assert abs(c.extras["B"] - b) <= 4 * c.extras["B_stderr"]
    assert c.value == pytest.approx(math.sqrt(c.extras["B"] * K.lieb_hls_constant(1, 2 / 3)))


def test_trace_fractional_gates():
    with pytest.raises(RangeViolation):
        K.trace_fractional_constant(dict(p=2.0, q=2.0, m=1, n=1), 1000)
    with pytest.raises(ConstraintViolation):
        K.trace_fractional_constant(dict(p=1.5, q=3.0, m=1, n=1), 1000)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([(1.5, 2, 1), (2.0, 3, 2), (2.5, 3, 1), (1.2, 4, 1)]),
       st.floats(-4, 4), st.floats(-4, 4))
def test_diag_young_gaussians_stay_below(tup, la, lb):
    p, m, n = tup
    t = derive(Family.DiagYoung, p=p, m=m, n=n)
    r = diag_young_ratio(math.exp(la), math.exp(lb), t)
    assert r.ratio <= K.diag_young_constant(t).value * (1 + 1e-12)


def test_averaging_reduces_to_hardy_at_p_equal_q():
    assert K.averaging_constant(3, 2.0, 2.0).value == 2.0


def test_unit_bounds_are_labelled():
    c = K.unit_bound("multilinear-young", dict(p=1.5, q=3.0, m=2, n=1, s=(2.0, 2.0)))
    assert c.value == 1.0 and "not known to be sharp" in c.extras["kind"]


def test_catalog_covers_every_theorem():
    assert set(K.CATALOG) == set(K.TheoremId)
    entries = K.default_catalog(samples=20_000, seed=1)
    assert [e["id"] for e in entries] == [t.value for t in K.TheoremId]
    missing = {e["id"] for e in entries if e["value"] is None}
    assert missing == {"young-line", "mhls-riesz", "diag-trace", "stein-weiss"}
    for e in entries:
        if e["method"] == "MonteCarlo":
            assert e["seed"] == 1 and e["samples"] == 20_000
            assert e["uncertainty"] > 0
    assert np.isfinite([e["value"] for e in entries if e["value"] is not None]).all()
