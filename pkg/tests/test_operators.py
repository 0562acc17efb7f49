import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import exp1

from sharpineq.constants import averaging_constant
from sharpineq.errors import DomainError, GridTooCoarse, MeasureMismatch
from sharpineq.operators import (HAAR, GridFunction, RadialProfile, _hilbert_cells,
                                 _hilbert_cells_log_uniform, averaging_ratio, exp_density_convolve,
                                 hardy_ratio, hardy_T, hardy_T_star, hilbert_I, k_kernel_mass,
                                 k_kernel_mass_exact, log_grid, lp_norm, real_grid, sample,
                                 sector_grid, tensor_hardy, trace_operator_norm,
                                 uniform_real_grid)
from sharpineq.suites import random_log_profile

GRID = log_grid(1e-8, 1e3, 2**14)


def _exp_decay():
    return sample(GRID, lambda t: np.exp(-t))


def test_log_grid_has_one_as_a_node():
    g = log_grid(1e-3, 1e3, 101)
    assert np.any(g.nodes == 1.0)
    assert np.allclose(np.diff(np.log(g.nodes)), g.log_step)


def test_haar_weights_are_the_log_step():
    g = log_grid(1e-2, 1e2, 51, measure=HAAR)
    assert np.allclose(g.weights[1:-1], g.log_step)


def test_grid_function_validation():
    with pytest.raises(DomainError):
        GridFunction(np.array([1.0, 0.5]), np.zeros(2), np.ones(2))
    with pytest.raises(MeasureMismatch):
        GridFunction(np.array([0.0, 1.0]), np.zeros(2), np.ones(2), "real", HAAR)


def test_hardy_T_closed_form():
    x = GRID.nodes
    want = -np.expm1(-x) / x
    assert np.allclose(hardy_T(_exp_decay()).values, want, rtol=1e-6)


def test_hardy_T_star_closed_form():
    x = GRID.nodes
    got = hardy_T_star(_exp_decay()).values
    # linear interpolation of e^{-t} costs about (xΔ)²/8 relative
    keep = x < 5
    assert np.allclose(got[keep], exp1(x[keep]), rtol=1e-5)


def test_hilbert_closed_form():
    x = GRID.nodes
    keep = x < 30
    want = np.exp(x[keep]) * exp1(x[keep])
    assert np.allclose(hilbert_I(_exp_decay()).values[keep], want, rtol=1e-6)


def test_hilbert_routes_agree():
    rng = np.random.default_rng(3)
    g = log_grid(1e-12, 1e14, 2**11)
    for _ in range(5):
        v = random_log_profile(g, rng)
        live = (v[:-1] != 0) | (v[1:] != 0)
        dense = _hilbert_cells(g.nodes, v, live, 512)
        conv = _hilbert_cells_log_uniform(v, g.log_step, live)
        pos = dense > 0
        assert np.max(np.abs(conv[pos] / dense[pos] - 1)) < 1e-12
        assert np.all(conv[~pos] == 0)


def test_hilbert_below_T_plus_T_star():
    rng = np.random.default_rng(4)
    g = log_grid(1e-12, 1e14, 2**11)
    for _ in range(20):
        f = g.with_values(random_log_profile(g, rng))
        bound = hardy_T(f).values + hardy_T_star(f).values
        assert np.all(hilbert_I(f).values <= bound * (1 + 1e-12))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_T_and_T_star_are_adjoint(seed):
    rng = np.random.default_rng(seed)
    g = log_grid(1e-6, 1e6, 2**13)
    f = g.with_values(random_log_profile(g, rng))
    h = g.with_values(random_log_profile(g, rng))
    lhs = (hardy_T(f).with_values(hardy_T(f).values * h.values)).integral()
    rhs = (f.with_values(f.values * hardy_T_star(h).values)).integral()
    assert lhs == pytest.approx(rhs, rel=1e-3, abs=1e-12 * max(abs(lhs), 1.0))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(-200, 200))
def test_hardy_ratio_is_dilation_invariant(seed, shift):
    # shifting the samples by whole log steps is an exact dilation on the grid
    rng = np.random.default_rng(seed)
    g = log_grid(1e-40, 1e40, 2**13)
    v = random_log_profile(g, rng)
    moved = np.roll(v, shift)
    if shift > 0:
        moved[:shift] = 0
    elif shift < 0:
        moved[shift:] = 0
    r0 = hardy_ratio(g.with_values(v), 2.0, 2.0)
    r1 = hardy_ratio(g.with_values(moved), 2.0, 2.0)
    assert r1 == pytest.approx(r0, rel=1e-9)
    assert r0 < 2.0


def test_lp_norm_exponential():
    assert lp_norm(_exp_decay(), 2.0) == pytest.approx(math.sqrt(0.5), rel=1e-6)


def test_norm_refuses_a_heavy_tail():
    g = log_grid(1e-3, 1e3, 2**10)
    f = sample(g, lambda t: t ** -0.6)
    with pytest.raises(GridTooCoarse):
        lp_norm(f, 2.0)


def test_tensor_hardy_on_products():
    g = log_grid(1e-3, 1e3, 257)
    a = np.exp(-g.nodes)
    b = 1.0 / (1.0 + g.nodes) ** 2
    H = sector_grid(g, 2).with_values(np.multiply.outer(a, b))
    TT = tensor_hardy(H).values
    want = np.multiply.outer(hardy_T(g.with_values(a)).values, hardy_T(g.with_values(b)).values)
    assert np.allclose(TT, want, rtol=1e-10)


def test_exp_density_convolve_matches_closed_form():
    # e^{-|x|} * e^{-|x|} = (1 + |x|) e^{-|x|}
    g = uniform_real_grid(40.0, 0.005)
    out = exp_density_convolve(sample(g, lambda x: np.exp(-np.abs(x))))
    x = g.nodes
    keep = np.abs(x) < 20
    assert np.allclose(out.values[keep], ((1 + np.abs(x)) * np.exp(-np.abs(x)))[keep],
                       rtol=1e-4)


def test_exp_density_convolve_needs_uniform_real_grid():
    with pytest.raises(DomainError):
        exp_density_convolve(log_grid(1e-2, 1e2, 20))


def test_k_kernel_mass():
    for m in range(1, 7):
        assert float(k_kernel_mass_exact(m)) == 2 / m
        assert k_kernel_mass(m) == pytest.approx(2 / m, rel=1e-12)


def test_radial_norm_of_a_gaussian():
    prof = RadialProfile.from_function(3, lambda r: np.exp(-math.pi * r * r), 1e-6, 1e3)
    # ‖e^{-π|x|²}‖_p in R^n is p^{-n/(2p)}
    assert prof.norm(2.0) == pytest.approx(2.0 ** (-0.75), rel=1e-6)


def test_averaging_ratio_below_its_constant():
    prof = RadialProfile.from_function(2, lambda r: np.exp(-r), 1e-8, 1e4)
    c = averaging_constant(2, 2.0, 4.0).value
    assert averaging_ratio(prof, 2.0, 4.0) < c


def test_trace_probe_only_for_m_2():
    with pytest.raises(DomainError):
        trace_operator_norm(3, 2.0)


def test_exports():
    g = real_grid(0.0, 1.0, 4).with_values([1.0, 2.0, 3.0, 4.0])
    head = json.loads(g.to_json())["header"]
    assert head["domain"] == "real"
    lines = g.to_csv().splitlines()
    assert lines[0].startswith("# ") and lines[1] == "node,value" and len(lines) == 6
