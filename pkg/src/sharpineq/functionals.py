"""Ratio evaluators, extremal families and the sharpness search.

Every evaluator returns a :class:`RatioReport` comparing LHS/RHS with the
catalog constant.  Gaussian inputs are evaluated with exact gaussian
algebra; everything else runs on grids or through Monte Carlo.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence

import numpy as np
from scipy.linalg import lu_factor
from scipy.signal import fftconvolve

from .constants import (ConstantValue, Method, bliss_constant, diag_mhls_constant,
                        diag_young_constant, exp_density_constant, hardy_constant,
                        young_l2_constant)
from .errors import ConstraintViolation, DomainError, GridTooCoarse
from .exponents import ExponentTuple, Family, derive, dual
from .montecarlo import GeneralG, RieszPairwise, estimate_multilinear_lhs
from .numerics import OptimResult, nelder_mead
from .operators import (GridFunction, RadialProfile, exp_density_ratio, hardy_ratio, log_grid,
                        sample, uniform_real_grid)


# ------------------------------------------------------------ reports

class Verdict(str, Enum):
    Pass = "pass"
    Fail = "fail"
    Empirical = "empirical"


def digest(*items) -> str:
    """Short sha256 of the inputs, stable across runs."""
    h = hashlib.sha256()
    for it in items:
        if isinstance(it, GridFunction):
            it = it.values
        if isinstance(it, np.ndarray):
            h.update(np.ascontiguousarray(it, dtype=float).tobytes())
        else:
            h.update(json.dumps(it, sort_keys=True, default=repr).encode())
    return h.hexdigest()[:16]


@dataclass(frozen=True)
class RatioReport:
    theorem: str
    lhs: float
    rhs: float
    ratio: float
    constant: ConstantValue | None
    uncertainty: float = 0.0
    tol: float = 1e-6
    seed: int | None = None
    inputs: str = ""
    extras: dict = field(default_factory=dict, compare=False)
    expect: str = "bound"

    @property
    def sigma(self) -> float:
        """Combined standard error of the ratio and the constant."""
        c = self.constant
        return math.hypot(self.uncertainty, c.uncertainty if c else 0.0)

    @property
    def bound(self) -> float:
        """Largest ratio still counted as a pass."""
        return self.constant.value * (1.0 + self.tol) + 3.0 * self.sigma

    @property
    def slack(self) -> float | None:
        return None if self.constant is None else self.constant.value - self.ratio

    @property
    def verdict(self) -> Verdict:
        """Pass rules by ``expect``.

        bound: ratio ≤ C(1+tol) + 3σ.  equal: |ratio − C| ≤ C·tol + 3σ.
        below: ratio < C − 3σ (a non-extremal input).  reach: C(1−tol) ≤
        ratio ≤ C(1 + min(tol, 1e-6)) + 3σ.
        """
        if self.constant is None:
            return Verdict.Empirical
        c, r, s = self.constant.value, self.ratio, 3.0 * self.sigma
        if self.expect == "equal":
            ok = abs(r - c) <= c * self.tol + s
        elif self.expect == "below":
            ok = r < c - s
        elif self.expect == "reach":
            ok = c * (1.0 - self.tol) <= r <= c * (1.0 + min(self.tol, 1e-6)) + s
        else:
            ok = r <= self.bound
        return Verdict.Pass if ok else Verdict.Fail

    def to_dict(self) -> dict:
        c = self.constant
        d = {"theorem": self.theorem, "lhs": self.lhs, "rhs": self.rhs, "ratio": self.ratio,
             "constant": None if c is None else c.value,
             "constant_uncertainty": None if c is None else c.uncertainty,
             "method": None if c is None else c.method.value,
             "uncertainty": self.uncertainty, "slack": self.slack,
             "verdict": self.verdict.value, "expect": self.expect, "seed": self.seed,
             "tol": self.tol, "inputs": self.inputs}
        if self.extras:
            d["extras"] = self.extras
        return d


def _report(theorem, lhs, rhs, constant, uncertainty=0.0, tol=1e-6, seed=None, inputs="",
            expect="bound", **extras) -> RatioReport:
    if not rhs > 0:
        raise DomainError("right-hand side vanishes")
    return RatioReport(theorem, float(lhs), float(rhs), float(lhs) / float(rhs), constant,
                       float(uncertainty), tol, seed, inputs, extras, expect)


def with_expect(report: RatioReport, expect: str, tol: float | None = None) -> RatioReport:
    """Same numbers, different pass rule."""
    return replace(report, expect=expect, tol=report.tol if tol is None else tol)


# ------------------------------------------------------------ extremal families

class FamilyKind(str, Enum):
    Gaussian = "Gaussian"
    Bliss = "Bliss"
    CoshPower = "CoshPower"
    ConformalFactor = "ConformalFactor"
    PowerCutoff = "PowerCutoff"


@dataclass(frozen=True)
class ExtremalFamily:
    """A parametrized test function.

    ``params`` holds the free parameters (at most three); ``fixed`` holds
    the exponents the family is tied to.
    """
    kind: FamilyKind
    params: tuple
    fixed: dict = field(default_factory=dict)
    domain: str = "real"

    # constructors ------------------------------------------------------
    @classmethod
    def gaussian(cls, scales: Sequence[float], n: int = 1) -> "ExtremalFamily":
        scales = tuple(float(a) for a in scales)
        if any(not a > 0 for a in scales):
            raise DomainError("gaussian scales must be positive")
        return cls(FamilyKind.Gaussian, scales, {"n": n}, "Rn")

    @classmethod
    def bliss(cls, p: float, q: float, c: float = 1.0, shape: float | None = None):
        r = 1.0 / (1.0 / p - 1.0 / q)
        shape = q / (q - p) if shape is None else shape
        return cls(FamilyKind.Bliss, (float(c), float(shape)), {"p": p, "q": q, "r": r}, "half")

    @classmethod
    def cosh_power(cls, p: float, scale: float | None = None, delta: float | None = None,
                   printed_scale: bool = False):
        """cosh(b x)^{−δ} with δ = 2/(2−p) and b = p'/(pδ).

        ``printed_scale`` divides b by 4, the variant that does not solve
        the Euler–Lagrange equation and is kept for comparison.
        """
        d = 2.0 / (2.0 - p) if delta is None else delta
        if scale is None:
            scale = dual(p) / (p * d) / (4.0 if printed_scale else 1.0)
        return cls(FamilyKind.CoshPower, (float(scale), float(d)), {"p": p}, "real")

    @classmethod
    def conformal(cls, n: int, p: float, scale: float = 1.0, center: float = 0.0,
                  power: float | None = None):
        power = n / p if power is None else power
        return cls(FamilyKind.ConformalFactor, (float(scale), float(center), float(power)),
                   {"n": n, "p": p}, "Rn")

    @classmethod
    def power_cutoff(cls, p: float, eps: float):
        if not eps > 0:
            raise DomainError("the cutoff family needs eps > 0")
        return cls(FamilyKind.PowerCutoff, (float(eps),), {"p": p}, "half")

    def with_params(self, params) -> "ExtremalFamily":
        return ExtremalFamily(self.kind, tuple(float(v) for v in params), self.fixed,
                              self.domain)

    # evaluation --------------------------------------------------------
    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        k = self.kind
        if k is FamilyKind.Gaussian:
            a, n = self.params[0], self.fixed["n"]
            return a ** (0.5 * n) * np.exp(-math.pi * a * x * x)
        if k is FamilyKind.Bliss:
            c, shape = self.params
            f = self.fixed
            return (1.0 + c * x ** (f["q"] / f["r"])) ** (-shape)
        if k is FamilyKind.CoshPower:
            b, d = self.params
            # cosh(u)^{-d} = (2 e^{-|u|} / (1 + e^{-2|u|}))^d, safe for large |u|
            u = np.abs(b * x)
            return np.exp(d * (math.log(2.0) - u - np.log1p(np.exp(-2.0 * u))))
        if k is FamilyKind.ConformalFactor:
            s, c, power = self.params
            return (1.0 + ((x - c) / s) ** 2) ** (-power)
        eps = self.params[0]
        p = self.fixed["p"]
        with np.errstate(divide="ignore"):
            return np.where((x > 0) & (x <= 1.0), np.abs(x) ** (-1.0 / p + eps), 0.0)

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "params": list(self.params), "fixed": self.fixed,
                "domain": self.domain}


# ------------------------------------------------------------ gaussian algebra

def gaussian_gram_det(alpha: float, beta: float, m: int) -> float:
    """det of the m×m matrix with α+(m−1)β on the diagonal and −β elsewhere, by LU."""
    if m < 1:
        raise DomainError("m must be positive")
    a = np.full((m, m), -float(beta))
    np.fill_diagonal(a, alpha + (m - 1) * beta)
    lu, piv = lu_factor(a)
    swaps = int(np.sum(piv != np.arange(m)))
    return float((-1) ** swaps * np.prod(np.diag(lu)))


def gaussian_lp_norm(a: float, p: float, n: int = 1, normalized: bool = True) -> float:
    """‖a^{n/2} e^{−πa|x|²}‖_p (or without the a^{n/2} factor)."""
    lg = -(n / (2.0 * p)) * math.log(a * p)
    if normalized:
        lg += 0.5 * n * math.log(a)
    return math.exp(lg)


def variational_product_max(lams: Sequence[float], seed: int = 0,
                            tol: float = 1e-12) -> tuple[float, np.ndarray, OptimResult]:
    """max over a > 0 of ∏ a_ℓ^{λ_ℓ} / Σ a_ℓ for λ on the simplex.

    The search runs on log a with the last coordinate pinned to 0 (the
    ratio is homogeneous of degree 0).  Returns (max, normalized argmax, result).
    """
    lam = np.asarray(lams, dtype=float)
    if np.any(lam < 0) or abs(lam.sum() - 1.0) > 1e-12:
        raise ConstraintViolation("λ must lie on the simplex")
    m = lam.size
    if m == 1:
        return 1.0, np.ones(1), OptimResult(np.zeros(0), 0.0, 0, True, tol)

    def log_obj(u):
        full = np.append(u, 0.0)
        top = full.max()
        return float(lam @ full - top - math.log(np.sum(np.exp(full - top))))

    start = np.log(np.maximum(lam[:-1], 1e-3) / max(lam[-1], 1e-3))
    start = np.clip(start, -39.0, 39.0)
    res = nelder_mead(log_obj, start, [(-40.0, 40.0)] * (m - 1), tol=tol, restarts=2,
                      seed=seed)
    a = np.exp(np.append(res.argmax, 0.0) - max(0.0, res.argmax.max()))
    return math.exp(res.value), a / a.sum(), res


# ------------------------------------------------------------ Young L²

def _lattice(g) -> tuple[np.ndarray, float | None]:
    if isinstance(g, GridFunction):
        if g.dim != 1:
            raise DomainError("expected a one-dimensional grid")
        steps = np.diff(g.nodes)
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
            raise DomainError("lattice evaluation needs a uniform grid")
        return g.values, float(steps[0])
    return np.asarray(g, dtype=float), None


def _lattice_norm(v: np.ndarray, step: float, p: float, dims: int = 1) -> float:
    return float((step ** dims * np.sum(np.abs(v) ** p)) ** (1.0 / p))


def young_l2_dual_form(h, g_list, tup, tol: float = 1e-6, step: float | None = None
                       ) -> RatioReport:
    """∬ h(w) ∏(g_k∗g̃_k)(w−x) h(x) dw dx against C² (‖h‖_{q'} ∏ ‖g_k‖_{s_k})².

    Scalars are read as gaussian scales a (the function a^{n/2} e^{−πa|x|²})
    and evaluated exactly; arrays or uniform grids (n = 1) are evaluated as
    lattice sums with FFT convolutions.
    """
    t = derive(Family.YoungL2, q=tup.q, m=tup.m, n=tup.n, s=tup.s) \
        if isinstance(tup, ExponentTuple) else derive(Family.YoungL2, **dict(tup))
    if len(g_list) != t.m:
        raise ConstraintViolation(f"need {t.m} functions g_k, got {len(g_list)}")
    c = young_l2_constant(t)
    c2 = ConstantValue("young-l2-squared", c.value ** 2, Method.ClosedForm, tuple=t)
    qp = t.q_prime
    if np.isscalar(h) and all(np.isscalar(g) for g in g_list):
        a = np.array([h, *g_list], dtype=float)
        if np.any(a <= 0):
            raise DomainError("gaussian scales must be positive")
        n = t.n
        lhs = math.exp(-0.5 * t.m * n * math.log(2.0) + 0.5 * n * np.sum(np.log(a))
                       - 0.5 * n * math.log(a.sum()))
        rhs = gaussian_lp_norm(a[0], qp, n) * math.prod(
            gaussian_lp_norm(ak, sk, n) for ak, sk in zip(a[1:], t.s))
        return _report("young-l2", lhs, rhs ** 2, c2, tol=tol, inputs=digest(a.tolist()),
                       route="gaussian")
    if t.n != 1:
        raise DomainError("grid evaluation of the dual form is one-dimensional")
    hv, hs = _lattice(h)
    gs = [_lattice(g) for g in g_list]
    delta = step or hs or gs[0][1]
    if delta is None:
        raise DomainError("pass step= for raw arrays")
    if any(s is not None and abs(s - delta) > 1e-9 * delta for s in [hs] + [s for _, s in gs]):
        raise GridTooCoarse("all inputs must share one lattice step")
    size = max(v.size for v, _ in gs)
    kern = np.ones(2 * size - 1)
    for v, _ in gs:
        ac = fftconvolve(v, v[::-1]) * delta
        pad = size - v.size
        kern *= np.pad(ac, pad)
    kh = fftconvolve(hv, kern) * delta
    centre = size - 1
    lhs = float(delta * np.dot(hv, kh[centre:centre + hv.size]))
    rhs = _lattice_norm(hv, delta, qp) * math.prod(
        _lattice_norm(v, delta, sk) for (v, _), sk in zip(gs, t.s))
    return _report("young-l2", lhs, rhs ** 2, c2, tol=tol,
                   inputs=digest(hv, *[v for v, _ in gs]), route="lattice")


def young_l2_gaussian_ratio(log_scales, tup) -> float:
    """Gaussian dual-form ratio as a function of log a_0..a_m."""
    a = np.exp(np.asarray(log_scales, dtype=float))
    return young_l2_dual_form(float(a[0]), [float(v) for v in a[1:]], tup).ratio


# ------------------------------------------------------------ multilinear Young

def multilinear_young_ratio(H, g_list, tup, step: float = 1.0, tol: float = 1e-10
                            ) -> RatioReport:
    """‖F‖_q / (‖H‖_p ∏‖g_k‖_{s_k}) with F(x) = ∫ ∏ g_k(x − y_k) H(y) dy, n = 1.

    ``H`` is an m-dimensional array on the lattice step·Z^m; each g_k is a
    centred array of odd length on step·Z (or a uniform grid).  The lattice
    sums satisfy the same bound with constant 1, so the verdict is exact up
    to rounding.
    """
    t = tup if isinstance(tup, ExponentTuple) else derive(Family.MYoung, **dict(tup))
    if t.family not in (Family.MYoung, Family.MYoungRestricted):
        raise ConstraintViolation("expected a multilinear Young tuple")
    Hv = H.values if isinstance(H, GridFunction) else np.asarray(H, dtype=float)
    if Hv.ndim != t.m or len(g_list) != t.m:
        raise ConstraintViolation(f"need an {t.m}-dimensional H and {t.m} kernels")
    gs = []
    for g in g_list:
        v, s = _lattice(g)
        if s is not None and abs(s - step) > 1e-9 * step:
            raise GridTooCoarse("kernels and H must share one lattice step")
        if v.size % 2 == 0:
            raise DomainError("kernels must be centred arrays of odd length")
        gs.append(v)
    if Hv.size > 2e6:
        raise GridTooCoarse("tensor grid too large for dense evaluation")
    N = Hv.shape
    half = [v.size // 2 for v in gs]
    lo = min(-h for h in half)
    hi = max(n - 1 + h for n, h in zip(N, half))
    xs = np.arange(lo, hi + 1)
    mats = []
    for k, v in enumerate(gs):
        off = xs[:, None] - np.arange(N[k])[None, :] + half[k]
        ok = (off >= 0) & (off < v.size)
        mats.append(np.where(ok, v[np.clip(off, 0, v.size - 1)], 0.0))
    letters = "abcdefgh"[:t.m]
    expr = ",".join(f"x{c}" for c in letters) + "," + letters + "->x"
    F = np.einsum(expr, *mats, Hv, optimize=True) * step ** t.m
    lhs = _lattice_norm(F, step, t.q)
    rhs = _lattice_norm(Hv, step, t.p, dims=t.m) * math.prod(
        _lattice_norm(v, step, s) for v, s in zip(gs, t.s))
    one = ConstantValue("multilinear-young", 1.0, Method.ClosedForm, tuple=t)
    return _report("multilinear-young", lhs, rhs, one, tol=tol, inputs=digest(Hv, *gs))


# ------------------------------------------------------------ diagonal Young

def diag_young_ratio(f, g, tup, tol: float = 1e-6, samples: int = 10**6, seed: int = 42,
                     step: float | None = None) -> RatioReport:
    """∫ ∏ f(x_k) ∏_{i<j} g(x_i − x_j) dx / (‖f‖_p^m ‖g‖_q^{m(m−1)/2}).

    Scalars α, β mean f = e^{−πα|x|²}, g = e^{−πβ|x|²} (exact, via the
    Gram determinant).  Uniform grids with n = 1, m = 2 use a lattice sum;
    a RadialProfile f with a callable radial g goes through Monte Carlo.
    """
    t = tup if isinstance(tup, ExponentTuple) else derive(Family.DiagYoung, **dict(tup))
    c = diag_young_constant(t)
    m, n, p, q = t.m, t.n, t.p, t.q
    pairs = m * (m - 1) // 2
    if np.isscalar(f) and np.isscalar(g):
        alpha, beta = float(f), float(g)
        lhs = gaussian_gram_det(alpha, beta, m) ** (-0.5 * n)
        rhs = gaussian_lp_norm(alpha, p, n, False) ** m \
            * gaussian_lp_norm(beta, q, n, False) ** pairs
        return _report("diag-young", lhs, rhs, c, tol=tol, inputs=digest([alpha, beta]),
                       route="gaussian")
    if isinstance(f, RadialProfile):
        if not callable(g):
            raise DomainError("Monte Carlo route needs a callable radial g")
        kern = GeneralG(lambda d: g(np.linalg.norm(d, axis=-1)), integrable=True,
                        local_exponent=0.0, tail_exponent=0.0)
        est = estimate_multilinear_lhs(f, kern, t, samples, seed)
        gn = g.norm(q) if hasattr(g, "norm") else None
        if gn is None:
            raise DomainError("g must expose norm(q)")
        rhs = f.norm(p) ** m * gn ** pairs
        return _report("diag-young", est.mean, rhs, c, est.stderr / rhs, tol, seed,
                       digest(f.profile.values), route="montecarlo", samples=samples)
    if m != 2 or n != 1:
        raise DomainError("grid route covers n = 1, m = 2")
    fv, fs = _lattice(f)
    gv, gs_ = _lattice(g)
    delta = step or fs or gs_
    if gv.size % 2 == 0:
        raise DomainError("g must be a centred array of odd length")
    lhs = float(delta * np.dot(fv, fftconvolve(fv, gv, mode="same")) * delta)
    rhs = _lattice_norm(fv, delta, p) ** 2 * _lattice_norm(gv, delta, q)
    return _report("diag-young", lhs, rhs, c, tol=tol, inputs=digest(fv, gv), route="lattice")


# ------------------------------------------------------------ MHLS and Stein–Weiss

def _as_profile(f, n: int) -> RadialProfile:
    if isinstance(f, RadialProfile):
        return f
    if isinstance(f, ExtremalFamily):
        return RadialProfile.from_function(n, f, 1e-8, 1e8, 2**15)
    if callable(f):
        return RadialProfile.from_function(n, f, 1e-8, 1e8, 2**15)
    raise DomainError("expected a radial profile or a callable")


def mhls_ratio(f, tup, samples: int = 10**6, seed: int = 42, tol: float = 0.0,
               constant: ConstantValue | None = None, workers: int | None = None
               ) -> RatioReport:
    """∫ ∏ f(x_k) ∏_{i<j} |x_i − x_j|^{−γ} dx / ‖f‖_p^m against the sphere constant.

    The constant is estimated with ``samples`` points and seed + 1 unless
    one is passed in, so the two estimates are independent.
    """
    t = tup if isinstance(tup, ExponentTuple) else derive(Family.DiagMHLS, **dict(tup))
    prof = _as_profile(f, t.n)
    est = estimate_multilinear_lhs(prof, RieszPairwise(t.gamma), t, samples, seed,
                                   workers=workers)
    if constant is None:
        constant = diag_mhls_constant(t, samples, seed + 1, workers)
    rhs = prof.norm(t.p) ** t.m
    return _report("diag-mhls", est.mean, rhs, constant, est.stderr / rhs, tol, seed,
                   digest(prof.profile.values), samples=samples,
                   batch_ratio=est.batch_ratio)


def steinweiss_ratio(f, tup, samples: int = 10**6, seed: int = 42,
                     workers: int | None = None) -> RatioReport:
    """Stein–Weiss functional with weights ∏|x_k|^{−β}; no reference constant."""
    t = tup if isinstance(tup, ExponentTuple) else derive(Family.SteinWeiss, **dict(tup))
    prof = _as_profile(f, t.n)
    est = estimate_multilinear_lhs(prof, RieszPairwise(t.gamma), t, samples, seed,
                                   beta=t.beta, workers=workers)
    rhs = prof.norm(t.p) ** t.m
    return _report("stein-weiss", est.mean, rhs, None, est.stderr / rhs, 0.0, seed,
                   digest(prof.profile.values), samples=samples)


def square_wave_perturbation(f, amplitude: float = 0.1, cycles: float = 4.0):
    """f(r)·(1 ± amplitude), the sign switching ``cycles`` times per unit of log r."""
    def g(r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            s = np.sign(np.sin(2.0 * math.pi * cycles * np.log(r)))
        return f(r) * (1.0 + amplitude * np.where(s == 0, 1.0, s))
    return g


# ------------------------------------------------------------ sharpness search

DEFAULT_BUDGET = 400


def _hardy_grid(nodes: int = 2**14) -> GridFunction:
    return log_grid(1e-10, 1e10, nodes)


def _cosh_grid(p: float, scale: float) -> GridFunction:
    # φ∗f decays like e^{−min(1, scale)|x|}; the step must resolve width 1/scale
    half = 40.0 / min(max(scale, 1e-3), 1.0)
    return uniform_real_grid(half, min(half / 4000.0, 0.05 / scale))


def sharpness_search(theorem: str, family: ExtremalFamily, tup=None,
                     budget: int = DEFAULT_BUDGET, seed: int = 0, samples: int = 10**5
                     ) -> tuple[OptimResult, RatioReport]:
    """Maximize a theorem's ratio over the free parameters of ``family``.

    Supported pairs: bliss/Bliss, exp-density/CoshPower, hardy/PowerCutoff,
    young-l2/Gaussian, diag-young/Gaussian and diag-mhls/ConformalFactor.
    """
    kind = family.kind
    if theorem == "bliss" and kind is FamilyKind.Bliss:
        p, q = family.fixed["p"], family.fixed["q"]
        const = bliss_constant(p, q)
        grid = _hardy_grid()
        k0 = family.params[1]

        def ratio(x):
            fam = family.with_params((math.exp(x[0]), x[1]))
            return hardy_ratio(sample(grid, fam), p, q)
        x0 = [math.log(family.params[0]), k0]
        box = [(-5.0, 5.0), (0.6 * k0, 1.6 * k0)]
        tol = 1e-6
    elif theorem == "exp-density" and kind is FamilyKind.CoshPower:
        p = family.fixed["p"]
        const = exp_density_constant(p)
        b0, d0 = family.params

        def ratio(x):
            b = math.exp(x[0])
            return exp_density_ratio(sample(_cosh_grid(p, b * x[1]),
                                            family.with_params((b, x[1]))), p)
        x0 = [math.log(b0), d0]
        box = [(math.log(b0) - 3.0, math.log(b0) + 3.0), (0.5 * d0, 2.0 * d0)]
        tol = 1e-6
    elif theorem == "hardy" and kind is FamilyKind.PowerCutoff:
        p = family.fixed["p"]
        const = hardy_constant(p)
        grid = log_grid(1e-200, 1e10, 10**5)

        def ratio(x):
            return hardy_ratio(sample(grid, family.with_params((x[0],))), p, p)
        x0 = [family.params[0]]
        box = [(0.01, 0.5)]
        tol = 1e-6
    elif theorem == "young-l2" and kind is FamilyKind.Gaussian:
        t = tup if isinstance(tup, ExponentTuple) else derive(Family.YoungL2, **dict(tup))
        if len(family.params) != t.m + 1:
            raise ConstraintViolation("need one gaussian scale per slot")
        const = young_l2_dual_form(1.0, [1.0] * t.m, t).constant

        def ratio(x):
            return young_l2_gaussian_ratio(x, t)
        x0 = np.log(family.params)
        box = [(-40.0, 40.0)] * (t.m + 1)
        tol = 1e-12
    elif theorem == "diag-young" and kind is FamilyKind.Gaussian:
        t = tup if isinstance(tup, ExponentTuple) else derive(Family.DiagYoung, **dict(tup))
        const = diag_young_constant(t)

        def ratio(x):
            return diag_young_ratio(1.0, math.exp(x[0]), t).ratio
        x0 = [math.log(family.params[0])]
        box = [(-30.0, 30.0)]
        tol = 1e-12
    elif theorem == "diag-mhls" and kind is FamilyKind.ConformalFactor:
        t = tup if isinstance(tup, ExponentTuple) else derive(Family.DiagMHLS, **dict(tup))
        const = diag_mhls_constant(t, samples, seed + 1)
        pw = family.params[2]

        def ratio(x):
            fam = family.with_params((1.0, 0.0, x[0]))
            return mhls_ratio(fam, t, samples, seed, constant=const).ratio
        x0 = [pw]
        box = [(0.6 * pw, 1.6 * pw)]
        tol = 1e-4
    else:
        raise ConstraintViolation(f"family {kind.value} does not fit theorem {theorem!r}")

    dim = len(x0)
    per_run = max(20, budget // 3)
    res = nelder_mead(ratio, x0, box, tol=tol, max_iter=per_run, restarts=1, seed=seed)
    best = res.argmax
    report = _report(theorem, res.value, 1.0, const, tol=1e-6, seed=seed,
                     inputs=digest(family.to_dict()), argmax=[float(v) for v in best],
                     gap=(const.value - res.value) / const.value, dim=dim)
    return res, report
