import math

import mpmath
import numpy as np
import pytest

from sharpineq.errors import IntegrabilityError, VarianceBlowup
from sharpineq.exponents import Family, derive
from sharpineq.montecarlo import (GeneralG, GeodesicPower, RadialAlgebraic, RieszPairwise,
                                  block_rng, estimate_B_integral, estimate_multilinear_lhs,
                                  estimate_sphere_product_integral, log_sphere_area,
                                  riesz_composition_constant, run_blocks, self_normalization,
                                  sphere_sample)
from sharpineq.operators import RadialProfile


def dyson(m: int, gamma: float) -> float:
    """Mean of ∏_{i<j}|ξ_i − ξ_j|^{−γ} for m uniform points on the circle."""
    b = -gamma / 2
    return math.gamma(1 + m * b) / math.gamma(1 + b) ** m


def test_block_streams_are_reproducible():
    a = block_rng(7, 3).random(5)
    assert np.array_equal(a, block_rng(7, 3).random(5))
    assert not np.array_equal(a, block_rng(7, 4).random(5))


def test_run_blocks_ignores_the_thread_count():
    def w(rng, count):
        return rng.exponential(size=count)
    one = run_blocks(w, 100_000, 11, block_size=4096)
    many = run_blocks(w, 100_000, 11, block_size=4096, workers=4)
    assert one == many
    assert one.mean == pytest.approx(1.0, abs=5 * one.stderr)


def test_run_blocks_flags_inconsistent_batches():
    # constant within a block, random between blocks: the CLT error is far too small
    def w(rng, count):
        return np.full(count, rng.normal())
    with pytest.raises(VarianceBlowup):
        run_blocks(w, 64 * 1024, 1, block_size=1024)


def test_sphere_points_are_unit_vectors():
    x = sphere_sample(3, np.random.default_rng(0), 1000)
    assert x.shape == (1000, 4)
    assert np.allclose(np.linalg.norm(x, axis=1), 1.0)


def test_sphere_area():
    assert math.exp(log_sphere_area(1)) == pytest.approx(2 * math.pi)
    assert math.exp(log_sphere_area(2)) == pytest.approx(4 * math.pi)


@pytest.mark.parametrize("k,a", [(1, 0.5), (2, 1.0), (3, 0.0)])
def test_geodesic_law_is_normalized(k, a):
    est = self_normalization(GeodesicPower(k, a), 200_000, 3)
    assert est.mean == pytest.approx(1.0, abs=4 * est.stderr + 1e-12)


def test_radial_law_is_normalized():
    est = self_normalization(RadialAlgebraic(3, 1.0, 3.0, 0.7), 200_000, 4)
    assert est.mean == pytest.approx(1.0, abs=4 * est.stderr)


@pytest.mark.parametrize("m,gamma", [(2, 0.5), (3, 0.5), (3, 0.3)])
def test_circle_matches_dyson(m, gamma):
    est = estimate_sphere_product_integral(1, m, gamma, 200_000, 5)
    assert abs(est.mean - dyson(m, gamma)) <= 4 * est.stderr


def test_sphere_gate():
    with pytest.raises(IntegrabilityError):
        estimate_sphere_product_integral(1, 3, 0.7, 1000)
    with pytest.raises(IntegrabilityError):
        estimate_sphere_product_integral(2, 1, 0.5, 1000)


def riesz_composition_quadrature(a: float, b: float) -> float:
    """∫_R |1 − y|^{−a} |y|^{−b} dy in mpmath, with the singular points and
    the tail mapped away (y = ±s^k near 0 and 1, y = ±1/u beyond 2)."""
    mp = mpmath.mp.clone()
    mp.dps = 30
    a, b = mp.mpf(a), mp.mpf(b)
    k = 20
    top = mp.mpf(0.5) ** (mp.mpf(1) / k)

    def g(y):
        return abs(1 - y) ** -a * abs(y) ** -b
    near0 = mp.quad(lambda s: k * s ** (k * (1 - b) - 1) * ((1 - s ** k) ** -a
                                                            + (1 + s ** k) ** -a), [0, top])
    near1 = mp.quad(lambda s: k * s ** (k * (1 - a) - 1) * ((1 + s ** k) ** -b
                                                            + (1 - s ** k) ** -b), [0, top])
    mid = mp.quad(g, [-2, -0.5]) + mp.quad(g, [1.5, 2])
    tail = mp.quad(lambda u: (abs(u - 1) ** -a + (u + 1) ** -a) * u ** (a + b - 2), [0, 0.5])
    return float(near0 + near1 + mid + tail)


@pytest.mark.parametrize("a,b", [(0.7, 0.7), (0.6, 0.9), (0.8, 0.5)])
def test_riesz_composition_against_quadrature(a, b):
    want = riesz_composition_quadrature(a, b)
    assert riesz_composition_constant(1, a, b) == pytest.approx(want, rel=1e-9)


def test_B_integral_reduces_to_riesz_composition():
    est = estimate_B_integral(3, 1, 1.0, 200_000, 6)
    assert abs(est.mean - riesz_composition_constant(3, 2.0, 2.0)) <= 4 * est.stderr


def test_B_integral_does_not_see_the_direction():
    e1 = estimate_B_integral(2, 2, 0.5, 200_000, 7)
    e2 = estimate_B_integral(2, 2, 0.5, 200_000, 8, eta=[0.6, 0.8])
    assert abs(e1.mean - e2.mean) <= 4 * math.hypot(e1.stderr, e2.stderr)


def test_B_gate_and_direction_check():
    with pytest.raises(IntegrabilityError):
        estimate_B_integral(1, 1, 0.5, 1000)
    with pytest.raises(ValueError):
        estimate_B_integral(2, 2, 0.5, 1000, eta=[1.0, 1.0])


def test_gaussian_product_without_kernel():
    # G ≡ 1 makes the integral (∫ f)^m
    t = derive(Family.DiagYoung, p=2.0, m=2, n=1)
    prof = RadialProfile.from_function(1, lambda r: np.exp(-math.pi * r * r), 1e-6, 1e3)
    flat = GeneralG(lambda d: np.ones(d.shape[0]), integrable=True)
    est = estimate_multilinear_lhs(prof, flat, t, 200_000, 9)
    assert abs(est.mean - 1.0) <= 4 * est.stderr


def test_general_kernel_needs_a_gate():
    t = derive(Family.DiagYoung, p=2.0, m=2, n=1)
    prof = RadialProfile.from_function(1, lambda r: np.exp(-r), 1e-6, 1e3)
    with pytest.raises(IntegrabilityError):
        estimate_multilinear_lhs(prof, GeneralG(lambda d: np.ones(d.shape[0])), t, 1000)


def test_kernel_must_match_the_tuple():
    t = derive(Family.DiagMHLS, p=2.0, m=3, n=1)
    prof = RadialProfile.from_function(1, lambda r: (1 + r * r) ** -0.5, 1e-6, 1e6)
    with pytest.raises(IntegrabilityError):
        estimate_multilinear_lhs(prof, RieszPairwise(0.4), t, 1000)


def test_estimates_are_seed_deterministic():
    a = estimate_sphere_product_integral(2, 2, 1.0, 50_000, 42)
    b = estimate_sphere_product_integral(2, 2, 1.0, 50_000, 42)
    assert a == b
