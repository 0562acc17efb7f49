"""Verification suites behind ``sharpineq verify``.

Each suite returns a list of RatioReport.  Randomness comes from
``np.random.default_rng([seed, k])`` with a fixed k per suite, so suites
are independent of each other and of the order they run in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from . import constants as K
from .constants import ConstantValue, Method
from .exponents import Family, derive
from .functionals import (ExtremalFamily, RatioReport, _report, diag_young_ratio, digest,
                          gaussian_gram_det, mhls_ratio, multilinear_young_ratio,
                          sharpness_search, square_wave_perturbation, steinweiss_ratio,
                          variational_product_max, with_expect, young_l2_dual_form)
from .montecarlo import (estimate_B_integral, estimate_sphere_product_integral,
                         riesz_composition_constant)
from .numerics import integrate_1d
from .operators import (GridFunction, exp_density_ratio, hardy_T, hardy_T_star, hardy_ratio,
                        hilbert_I, k_kernel_mass, k_kernel_mass_exact, log_grid, lp_norm,
                        real_grid, sample, sector_grid, trace_operator_norm, uniform_real_grid)
from .rearrange import riesz_sobolev_check, sector_check


ROUNDING = 1e-12


@dataclass(frozen=True)
class Budget:
    draws: int
    grid: int
    samples: int
    quick: bool


def _identity(name: str, got: float, want: float, tol: float, **extras) -> RatioReport:
    one = ConstantValue(name, 1.0, Method.ClosedForm)
    return _report(name, got, want, one, tol=tol, expect="equal", inputs=digest([got, want]),
                   **extras)


def _unit(name: str) -> ConstantValue:
    return ConstantValue(name, 1.0, Method.ClosedForm)


def random_log_profile(grid: GridFunction, rng) -> np.ndarray:
    """Nonnegative f with compact support: a random mix of log-normal bumps
    and a random step, cut to a random interval."""
    t = np.log(grid.nodes)
    lo = rng.uniform(-12.0, 4.0)
    hi = lo + rng.uniform(0.5, 10.0)
    v = np.zeros_like(t)
    for _ in range(int(rng.integers(1, 5))):
        c = rng.uniform(lo, hi)
        w = rng.uniform(0.05, 3.0)
        v += rng.uniform(0.1, 5.0) * np.exp(-0.5 * ((t - c) / w) ** 2 + rng.normal() * (t - c))
    cut = rng.uniform(lo, hi)
    v += rng.uniform(0.0, 2.0) * (t < cut)
    v[(t < lo) | (t > hi)] = 0.0
    return v


# ------------------------------------------------------------ suites

def hardy_suite(seed: int, b: Budget) -> list[RatioReport]:
    rng = np.random.default_rng([seed, 1])
    grid = log_grid(1e-200, 1e10, b.grid)
    c = K.hardy_constant(2.0)
    worst = None
    for _ in range(b.draws):
        f = grid.with_values(random_log_profile(grid, rng))
        r = _report("hardy", hardy_ratio(f, 2.0, 2.0), 1.0, c, tol=0.0, seed=seed,
                    inputs=digest(f.values))
        if worst is None or r.ratio > worst.ratio:
            worst = r
    out = [replace_extras(worst, draws=b.draws, note="largest ratio over random draws")]
    cut = ExtremalFamily.power_cutoff(2.0, 0.01)
    r = _report("hardy", hardy_ratio(sample(grid, cut), 2.0, 2.0), 1.0, c, tol=0.02,
                seed=seed, inputs=digest(cut.to_dict()), expect="reach",
                family=cut.to_dict())
    out.append(r)
    res, rep = sharpness_search("bliss", ExtremalFamily.bliss(2.0, 4.0, c=3.0, shape=1.5),
                                budget=60 if b.quick else 200)
    out.append(with_expect(rep, "reach", 5e-3))
    cb = K.bliss_constant(2.0, 4.0)
    worst = None
    for _ in range(b.draws // 5):
        f = grid.with_values(random_log_profile(grid, rng))
        r = _report("bliss", hardy_ratio(f, 2.0, 4.0), 1.0, cb, tol=1e-6, seed=seed,
                    inputs=digest(f.values))
        if worst is None or r.ratio > worst.ratio:
            worst = r
    out.append(worst)
    return out


def replace_extras(r: RatioReport, **extras) -> RatioReport:
    return replace(r, extras={**r.extras, **extras})


def young_suite(seed: int, b: Budget) -> list[RatioReport]:
    rng = np.random.default_rng([seed, 2])
    out = []
    err = 0.0
    for _ in range(1000 if not b.quick else 200):
        m = int(rng.integers(1, 9))
        a, be = rng.uniform(0.01, 10.0), rng.uniform(0.0, 10.0)
        want = a * (a + m * be) ** (m - 1)
        err = max(err, abs(gaussian_gram_det(a, be, m) / want - 1.0))
    out.append(_identity("gaussian-determinant", 1.0 + err, 1.0, 1e-12,
                         max_relative_error=err))
    err = 0.0
    for _ in range(100 if not b.quick else 20):
        lam = rng.dirichlet(np.ones(int(rng.integers(2, 6))))
        v, _, _ = variational_product_max(lam)
        err = max(err, abs(v / float(np.prod(lam ** lam)) - 1.0))
    out.append(_identity("variational-product", 1.0 + err, 1.0, 1e-8, max_relative_error=err))

    t = derive(Family.YoungL2, q=2.0, m=2, n=1, s=(4 / 3, 4 / 3))
    res, rep = sharpness_search("young-l2", ExtremalFamily.gaussian([1.0, 1.0, 1.0]), t)
    out.append(with_expect(rep, "equal", 1e-6))
    worst = None
    for _ in range(b.draws):
        a = np.exp(rng.uniform(-3, 3, 3))
        r = young_l2_dual_form(float(a[0]), [float(a[1]), float(a[2])], t, tol=1e-12)
        if worst is None or r.ratio > worst.ratio:
            worst = r
    out.append(worst)

    for label, tup in (("multilinear-young", dict(p=1.5, q=3.0, m=2, n=1, s=(2.0, 2.0))),
                       ("multilinear-young-restricted",
                        dict(p=1.25, q=2.0, m=2, n=1, s=(1 / 0.45, 1 / 0.45)))):
        fam = Family.MYoungRestricted if "restricted" in label else Family.MYoung
        tt = derive(fam, **tup)
        worst = None
        for _ in range(200 if not b.quick else 40):
            H = rng.random((24, 24)) ** rng.uniform(1, 4)
            gs = [rng.random(2 * int(rng.integers(1, 8)) + 1) for _ in range(2)]
            r = multilinear_young_ratio(H, gs, tt, step=float(rng.uniform(0.05, 1.0)))
            if worst is None or r.ratio > worst.ratio:
                worst = r
        out.append(replace_extras(worst, theorem_variant=label,
                                  note="C = 1 checked; largest ratio recorded"))
    t3 = derive(Family.MYoung, p=1.5, q=4.0, m=3, n=1, s=(2.4,) * 3)
    worst = None
    for _ in range(20 if not b.quick else 5):
        H = rng.random((10, 10, 10))
        gs = [rng.random(2 * int(rng.integers(1, 4)) + 1) for _ in range(3)]
        r = multilinear_young_ratio(H, gs, t3, step=0.3)
        if worst is None or r.ratio > worst.ratio:
            worst = r
    out.append(replace_extras(worst, note="m = 3 on a dense grid; largest ratio recorded"))
    return out


def exp_density_suite(seed: int, b: Budget) -> list[RatioReport]:
    rng = np.random.default_rng([seed, 3])
    out = []
    res, rep = sharpness_search("exp-density", ExtremalFamily.cosh_power(1.5),
                                budget=60 if b.quick else 200)
    out.append(with_expect(rep, "reach", 1e-2))
    c = K.exp_density_constant(1.5)
    grid = uniform_real_grid(40.0, 0.01)
    worst = None
    for _ in range(b.draws // 5):
        x = grid.nodes
        v = np.zeros_like(x)
        for _ in range(int(rng.integers(1, 4))):
            v += rng.uniform(0.1, 2.0) * np.exp(-np.abs(x - rng.uniform(-5, 5))
                                                * rng.uniform(0.3, 3.0))
        r = _report("exp-density", exp_density_ratio(grid.with_values(v), 1.5), 1.0, c,
                    tol=1e-6, seed=seed, inputs=digest(v))
        if worst is None or r.ratio > worst.ratio:
            worst = r
    out.append(worst)
    return out


def trace_suite(seed: int, b: Budget) -> list[RatioReport]:
    out = []
    for m in (2, 3, 4):
        exact = k_kernel_mass_exact(m)
        out.append(_identity("k-kernel-mass", k_kernel_mass(m), float(exact), 1e-10, m=m,
                             closed_form=str(exact)))
    out.append(_identity("trace-l2-constant", K.trace_l2_constant(4, 2.0).value, 1.0, 1e-15))
    c = K.trace_l2_constant(2, 2.0)
    probe = trace_operator_norm(2, 2.0, cells=400 if b.quick else 1200)
    out.append(_report("trace-l2", probe, 1.0, c, tol=0.02, expect="reach",
                       note="discrete operator-norm probe"))
    return out


def hilbert_suite(seed: int, b: Budget) -> list[RatioReport]:
    rng = np.random.default_rng([seed, 5])
    out = []
    q = integrate_1d(lambda x: K._x_over_sinh_power(2)(x), 0.0, math.inf, tol=1e-13)
    out.append(_identity("hilbert-trace-integral", q.value, math.pi ** 2 / 6, 1e-10))
    out.append(_identity("hilbert-constant", K.hilbert_constant(2.0).value, math.pi, 0.0))
    grid = log_grid(1e-12, 1e14, 2**11 if b.quick else 2**12)
    worst = None
    violations = 0
    cp = K.hilbert_constant(2.0)
    worst_norm = None
    for _ in range(200 if not b.quick else 40):
        f = grid.with_values(random_log_profile(grid, rng))
        hf = hilbert_I(f)
        i_f = hf.values
        bound = hardy_T(f).values + hardy_T_star(f).values
        mask = bound > 0
        ratio = float(np.max(i_f[mask] / bound[mask]))
        # far outside the support both sides agree to below double precision
        violations += int(np.sum(i_f > bound * (1.0 + ROUNDING)))
        r = _report("hilbert-pointwise", ratio, 1.0, _unit("hilbert-pointwise"), tol=ROUNDING,
                    seed=seed, inputs=digest(f.values))
        if worst is None or r.ratio > worst.ratio:
            worst = r
        rn = _report("hilbert", lp_norm(hf, 2.0), lp_norm(f, 2.0), cp, tol=1e-6,
                     seed=seed, inputs=digest(f.values))
        if worst_norm is None or rn.ratio > worst_norm.ratio:
            worst_norm = rn
    out.append(replace_extras(worst, violations=violations))
    out.append(worst_norm)
    hq = K.hilbert_trace_constant(2)
    out.append(_identity("hilbert-trace-constant", hq.value, 2.0 * math.sqrt(math.pi ** 2 / 6),
                         1e-10))
    return out


def rearrange_suite(seed: int, b: Budget) -> list[RatioReport]:
    rng = np.random.default_rng([seed, 6])
    out = []
    grid = real_grid(-4.0, 4.0, 64)
    worst = None
    bad = 0
    for _ in range(1000 if not b.quick else 100):
        fs = [grid.with_values(rng.random(64) * (rng.random(64) < 0.6)) for _ in range(3)]
        rep = riesz_sobolev_check(*fs)
        bad += int(not rep.monotone)
        r = _report("riesz-sobolev", rep.before, rep.after, _unit("riesz-sobolev"), tol=1e-10,
                    seed=seed, inputs=digest(*fs))
        if worst is None or r.ratio > worst.ratio:
            worst = r
    out.append(replace_extras(worst, violations=bad))
    axis = real_grid(0.0, 4.0, 24)
    axis = GridFunction(axis.nodes, axis.values, axis.weights, "half")
    worst = None
    bad = 0
    for _ in range(200 if not b.quick else 40):
        f = sector_grid(axis, 2).with_values(rng.random((24, 24)))
        g = sector_grid(axis, 2).with_values(rng.random((24, 24)) ** 3)
        rep = sector_check(f, g)
        bad += int(not rep.monotone)
        r = _report("sector-rearrangement", rep.before, rep.after,
                    _unit("sector-rearrangement"), tol=1e-10, seed=seed,
                    inputs=digest(f.values, g.values))
        if worst is None or r.ratio > worst.ratio:
            worst = r
    out.append(replace_extras(worst, violations=bad))
    return out


def mc_suite(seed: int, b: Budget) -> list[RatioReport]:
    out = []
    n = b.samples
    est = estimate_sphere_product_integral(2, 2, 1.0, n, seed)
    ref = sphere_pair_reference(2, 1.0)
    out.append(_report("sphere-product", est.mean, ref, _unit("sphere-product"),
                       est.stderr / ref, tol=0.0, seed=seed, expect="equal",
                       reference=ref, samples=n))
    est = estimate_B_integral(3, 1, 1.0, n, seed)
    ref = riesz_composition_constant(3, 2.0, 2.0)
    out.append(_report("b-integral", est.mean, ref, _unit("b-integral"), est.stderr / ref,
                       tol=0.0, seed=seed, expect="equal", reference=ref, samples=n))
    e1 = estimate_B_integral(2, 2, 0.5, n, seed)
    e2 = estimate_B_integral(2, 2, 0.5, n, seed, eta=[0.6, 0.8])
    cst = ConstantValue("b-integral", e1.mean, Method.MonteCarlo, e1.stderr, seed=seed,
                        samples=n)
    out.append(_report("b-integral-rotation", e2.mean, 1.0, cst, e2.stderr, tol=0.0,
                       seed=seed, expect="equal", samples=n))
    return out


def sphere_pair_reference(n: int, gamma: float) -> float:
    """∫∫_{S^n×S^n} |ξ−η|^{−γ} (normalized) reduced to one polar angle."""
    num = integrate_1d(lambda t: (2 * np.sin(t / 2)) ** (-gamma) * np.sin(t) ** (n - 1),
                       0.0, math.pi, tol=1e-13)
    den = integrate_1d(lambda t: np.sin(t) ** (n - 1), 0.0, math.pi, tol=1e-13)
    return num.value / den.value


def mhls_suite(seed: int, b: Budget) -> list[RatioReport]:
    t = derive(Family.DiagMHLS, p=2.0, m=3, n=1)
    # the perturbed profile sits about 1% below C; fewer samples cannot resolve that
    n = max(b.samples, 10**6)
    c = K.diag_mhls_constant(t, n, seed + 1)
    conf = ExtremalFamily.conformal(1, 2.0)
    r0 = with_expect(mhls_ratio(conf, t, n, seed, constant=c), "equal", 0.0)
    r1 = with_expect(mhls_ratio(square_wave_perturbation(conf), t, n, seed, constant=c),
                     "below", 0.0)
    return [r0, replace_extras(r1, perturbation="±10% square wave, 4 cycles per unit log r")]


def diag_young_suite(seed: int, b: Budget) -> list[RatioReport]:
    rng = np.random.default_rng([seed, 8])
    out = []
    for p, m, n in ((1.5, 2, 1), (2.0, 3, 2), (2.5, 3, 1)):
        t = derive(Family.DiagYoung, p=p, m=m, n=n)
        res, rep = sharpness_search("diag-young", ExtremalFamily.gaussian([1.0]), t)
        out.append(with_expect(rep, "equal", 1e-9))
        worst = None
        for _ in range(b.draws // 5):
            r = diag_young_ratio(float(np.exp(rng.uniform(-3, 3))),
                                 float(np.exp(rng.uniform(-3, 3))), t, tol=1e-12)
            if worst is None or r.ratio > worst.ratio:
                worst = r
        out.append(worst)
    t = derive(Family.DiagYoung, p=2.0, m=2, n=1)
    r = diag_young_ratio(1.0, 1e6, t, tol=1e-12)
    out.append(replace_extras(r, note="p = m: approaches C as beta/alpha grows"))
    return out


def stein_weiss_suite(seed: int, b: Budget) -> list[RatioReport]:
    t = derive(Family.SteinWeiss, p=1.5, m=2, n=1, beta=0.2)
    conf = ExtremalFamily.conformal(1, 1.5)
    n = max(b.samples // 4, 10**4)
    r1 = steinweiss_ratio(conf, t, n, seed)
    r2 = steinweiss_ratio(conf, t, 2 * n, seed)
    return [replace_extras(r1, doubled=r2.ratio, doubled_uncertainty=r2.uncertainty)]


SUITES: dict[str, Callable[[int, Budget], list[RatioReport]]] = {
    "hardy": hardy_suite,
    "young": young_suite,
    "exp-density": exp_density_suite,
    "trace": trace_suite,
    "hilbert": hilbert_suite,
    "rearrange": rearrange_suite,
    "mc": mc_suite,
    "mhls": mhls_suite,
    "diag-young": diag_young_suite,
    "stein-weiss": stein_weiss_suite,
}


def run_suites(names, seed: int = 42, quick: bool = False, samples: int | None = None,
               grid: int | None = None) -> list[RatioReport]:
    if isinstance(names, str):
        names = list(SUITES) if names == "all" else [names]
    unknown = [s for s in names if s not in SUITES]
    if unknown:
        raise KeyError(f"unknown suite(s): {', '.join(unknown)}")
    b = Budget(draws=100 if quick else 500,
               grid=grid or (2 * 10**4 if quick else 10**5),
               samples=samples or (10**5 if quick else 10**6), quick=quick)
    out: list[RatioReport] = []
    for s in names:
        out.extend(SUITES[s](seed, b))
    return out
