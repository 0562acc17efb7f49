import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from scipy.integrate import quad

from sharpineq import constants as K
from sharpineq.constants import ConstantValue, Method
from sharpineq.errors import ConstraintViolation, DomainError
from sharpineq.exponents import Family, derive
from sharpineq.functionals import (ExtremalFamily, RatioReport, Verdict, digest,
                                   diag_young_ratio, gaussian_gram_det, gaussian_lp_norm,
                                   multilinear_young_ratio, sharpness_search,
                                   square_wave_perturbation, steinweiss_ratio,
                                   variational_product_max, with_expect, young_l2_dual_form,
                                   young_l2_gaussian_ratio)
from sharpineq.operators import RadialProfile, uniform_real_grid

YL2 = derive(Family.YoungL2, q=2.0, m=2, n=1, s=(4 / 3, 4 / 3))
scales = st.floats(-3.0, 3.0)


def _report(ratio, c=1.0, unc=0.0, tol=0.0, expect="bound", cunc=0.0):
    return RatioReport("t", ratio, 1.0, ratio, ConstantValue("t", c, Method.ClosedForm, cunc),
                       unc, tol, expect=expect)


def test_verdict_modes():
    assert _report(1.0).verdict is Verdict.Pass
    assert _report(1.0 + 1e-9).verdict is Verdict.Fail
    assert _report(1.01, unc=0.004).verdict is Verdict.Pass
    assert _report(1.02, expect="equal", tol=0.01).verdict is Verdict.Fail
    assert _report(0.995, expect="equal", tol=0.01).verdict is Verdict.Pass
    assert _report(0.9, expect="below", unc=0.01).verdict is Verdict.Pass
    assert _report(0.98, expect="below", unc=0.01).verdict is Verdict.Fail
    assert _report(0.99, expect="reach", tol=0.02).verdict is Verdict.Pass
    assert _report(0.97, expect="reach", tol=0.02).verdict is Verdict.Fail
    # overshooting a sharp constant is never a pass, however loose the reach tolerance
    assert _report(1.01, expect="reach", tol=0.02).verdict is Verdict.Fail
    assert _report(1.0, unc=0.0, cunc=0.1).sigma == pytest.approx(0.1)


def test_empirical_without_a_constant():
    r = RatioReport("t", 1.0, 1.0, 1.0, None)
    assert r.verdict is Verdict.Empirical
    assert r.to_dict()["constant"] is None


def test_with_expect_keeps_the_numbers():
    r = with_expect(_report(0.99), "reach", 0.05)
    assert r.ratio == 0.99 and r.expect == "reach" and r.tol == 0.05


def test_digest_is_stable_and_sensitive():
    a = np.arange(5.0)
    assert digest(a) == digest(a.copy())
    assert digest(a) != digest(a + 1e-12)
    assert len(digest({"x": 1})) == 16


@given(st.floats(0.01, 10.0), st.floats(0.0, 10.0), st.integers(1, 8))
def test_gram_determinant_against_numpy(a, b, m):
    mat = np.full((m, m), -b)
    np.fill_diagonal(mat, a + (m - 1) * b)
    want = a * (a + m * b) ** (m - 1)
    assert gaussian_gram_det(a, b, m) == pytest.approx(np.linalg.det(mat), rel=1e-10)
    assert gaussian_gram_det(a, b, m) == pytest.approx(want, rel=1e-12)


@pytest.mark.parametrize("a,p", [(1.0, 2.0), (0.3, 1.5), (4.0, 3.0)])
def test_gaussian_norm_against_quadrature(a, p):
    val, _ = quad(lambda x: (math.sqrt(a) * math.exp(-math.pi * a * x * x)) ** p,
                  -np.inf, np.inf, epsabs=0, epsrel=1e-13)
    assert gaussian_lp_norm(a, p) == pytest.approx(val ** (1 / p), rel=1e-10)


@settings(max_examples=40)
@given(st.lists(st.floats(0.02, 1.0), min_size=2, max_size=5))
def test_variational_optimum_at_lambda(w):
    lam = np.array(w) / sum(w)
    val, a, _ = variational_product_max(lam)
    assert val == pytest.approx(float(np.prod(lam ** lam)), rel=1e-10)
    assert np.allclose(a, lam, atol=1e-5)


def test_variational_needs_the_simplex():
    with pytest.raises(ConstraintViolation):
        variational_product_max([0.5, 0.6])


@settings(max_examples=60)
@given(scales, scales, scales)
def test_young_l2_gaussians_stay_below(a0, a1, a2):
    r = young_l2_dual_form(math.exp(a0), [math.exp(a1), math.exp(a2)], YL2)
    assert r.ratio <= K.young_l2_constant(YL2).value ** 2 * (1 + 1e-12)
    assert r.verdict is Verdict.Pass


@settings(max_examples=60)
@given(scales, scales, scales, st.floats(-5.0, 5.0))
def test_young_l2_ratio_is_dilation_invariant(a0, a1, a2, c):
    r0 = young_l2_gaussian_ratio([a0, a1, a2], YL2)
    assert young_l2_gaussian_ratio([a0 + c, a1 + c, a2 + c], YL2) == pytest.approx(r0, rel=1e-11)


@settings(max_examples=60)
@given(scales, scales, scales, st.floats(1.05, 1.95))
def test_young_l2_ratio_is_symmetric_in_the_g_slots(a0, a1, a2, s1):
    # Σ 1/s = m/2 + 1/q with q = 4: pick s1 and solve for s2
    inv2 = 1.25 - 1 / s1
    assume(0.5 + 1e-6 < inv2 < 1 - 1e-6)
    s2 = 1 / inv2
    t12 = derive(Family.YoungL2, q=4.0, m=2, n=1, s=(s1, s2))
    t21 = derive(Family.YoungL2, q=4.0, m=2, n=1, s=(s2, s1))
    h, g1, g2 = math.exp(a0), math.exp(a1), math.exp(a2)
    r12 = young_l2_dual_form(h, [g1, g2], t12).ratio
    r21 = young_l2_dual_form(h, [g2, g1], t21).ratio
    assert r21 == pytest.approx(r12, rel=1e-12)


def test_young_l2_lattice_route_matches_gaussian_route():
    step = 0.01
    grid = uniform_real_grid(6.0, step)
    a = [1.3, 0.7, 2.1]
    fns = [grid.with_values(ExtremalFamily.gaussian([ak])(grid.nodes)) for ak in a]
    lattice = young_l2_dual_form(fns[0], fns[1:], YL2)
    exact = young_l2_dual_form(a[0], a[1:], YL2)
    assert lattice.ratio == pytest.approx(exact.ratio, rel=1e-8)
    assert lattice.extras["route"] == "lattice" and exact.extras["route"] == "gaussian"


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_multilinear_young_lattice_bound(seed):
    rng = np.random.default_rng(seed)
    t = derive(Family.MYoung, p=1.5, q=3.0, m=2, n=1, s=(2.0, 2.0))
    H = rng.random((16, 16)) ** rng.uniform(1, 4)
    gs = [rng.random(2 * int(rng.integers(1, 6)) + 1) for _ in range(2)]
    r = multilinear_young_ratio(H, gs, t, step=float(rng.uniform(0.05, 1.0)))
    assert r.ratio <= 1.0 + 1e-12


def test_multilinear_young_shape_checks():
    t = derive(Family.MYoung, p=1.5, q=3.0, m=2, n=1, s=(2.0, 2.0))
    with pytest.raises(ConstraintViolation):
        multilinear_young_ratio(np.ones(4), [np.ones(3), np.ones(3)], t)
    with pytest.raises(DomainError):
        multilinear_young_ratio(np.ones((4, 4)), [np.ones(2), np.ones(3)], t)


def test_diag_young_lattice_route_matches_gaussian_route():
    t = derive(Family.DiagYoung, p=1.5, m=2, n=1)
    step = 0.005
    grid = uniform_real_grid(8.0, step)
    x = grid.nodes
    f = np.exp(-math.pi * 1.0 * x * x)
    g = np.exp(-math.pi * 0.6 * x * x)
    lattice = diag_young_ratio(grid.with_values(f), grid.with_values(g), t)
    exact = diag_young_ratio(1.0, 0.6, t)
    assert lattice.ratio == pytest.approx(exact.ratio, rel=1e-8)


def test_diag_young_monte_carlo_route_matches_gaussian_route():
    t = derive(Family.DiagYoung, p=2.0, m=3, n=1)
    f = RadialProfile.from_function(1, lambda r: np.exp(-math.pi * r * r), 1e-6, 1e2)
    g = RadialProfile.from_function(1, lambda r: np.exp(-math.pi * 0.5 * r * r), 1e-6, 1e2)
    mc = diag_young_ratio(f, g, t, samples=200_000, seed=3)
    exact = diag_young_ratio(1.0, 0.5, t)
    assert abs(mc.ratio - exact.ratio) <= 4 * mc.uncertainty


def test_square_wave_perturbation():
    base = ExtremalFamily.conformal(1, 2.0)
    g = square_wave_perturbation(base, 0.1, 4.0)
    r = np.array([0.5, 1.05, 2.0, 3.0])
    ratio = g(r) / base(r)
    assert np.allclose(np.abs(ratio - 1.0), 0.1)


def test_cosh_profile_survives_large_arguments():
    fam = ExtremalFamily.cosh_power(1.5)
    v = fam(np.array([0.0, 1e4]))
    assert v[0] == pytest.approx(1.0) and v[1] == 0.0


def test_family_serialization_and_params():
    fam = ExtremalFamily.bliss(2.0, 4.0)
    d = fam.to_dict()
    assert d["kind"] == "Bliss" and d["fixed"]["r"] == pytest.approx(4.0)
    moved = fam.with_params((2.0, 3.0))
    assert moved.params == (2.0, 3.0) and moved.fixed == fam.fixed
    with pytest.raises(DomainError):
        ExtremalFamily.gaussian([0.0])


@pytest.mark.parametrize("p,m,n", [(1.5, 2, 1), (2.5, 3, 1)])
def test_diag_young_search_lands_on_the_constant(p, m, n):
    t = derive(Family.DiagYoung, p=p, m=m, n=n)
    res, rep = sharpness_search("diag-young", ExtremalFamily.gaussian([1.0]), t)
    assert rep.ratio == pytest.approx(K.diag_young_constant(t).value, rel=1e-9)


def test_hardy_cutoff_search():
    res, rep = sharpness_search("hardy", ExtremalFamily.power_cutoff(2.0, 0.3), budget=60)
    assert 0.0 < rep.extras["gap"] < 0.011
    assert res.argmax[0] == pytest.approx(0.01, abs=1e-3)


def test_search_rejects_mismatched_families():
    with pytest.raises(ConstraintViolation):
        sharpness_search("bliss", ExtremalFamily.gaussian([1.0]))


def test_stein_weiss_is_empirical():
    t = derive(Family.SteinWeiss, p=1.5, m=2, n=1, beta=0.2)
    r = steinweiss_ratio(ExtremalFamily.conformal(1, 1.5), t, 20_000, 1)
    assert r.verdict is Verdict.Empirical
    assert r.ratio > 0 and r.uncertainty > 0
