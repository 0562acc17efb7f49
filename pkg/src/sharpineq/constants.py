"""Catalog of sharp constants.

Closed forms are assembled in log space and exponentiated once.  Constants
that need a Monte Carlo integral carry the seed and sample count, with the
standard error pushed through the outer powers by the delta method.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .errors import ConstraintViolation, NonConvergence, RangeViolation
from .exponents import ExponentTuple, Family, Residual, assemble, derive, dual
from .montecarlo import estimate_B_integral, estimate_sphere_product_integral
from .numerics import golden_section, integrate_1d, lambda_product, log_gamma

LOG_PI = math.log(math.pi)


class Method(str, Enum):
    ClosedForm = "ClosedForm"
    Quadrature = "Quadrature"
    MonteCarlo = "MonteCarlo"


@dataclass(frozen=True)
class ConstantValue:
    id: str
    value: float
    method: Method
    uncertainty: float = 0.0
    tuple: ExponentTuple | None = None
    seed: int | None = None
    samples: int | None = None
    extras: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.uncertainty >= 0:
            raise ValueError("uncertainty must be nonnegative")
        if self.method is Method.MonteCarlo and (self.seed is None or self.samples is None):
            raise ValueError("Monte Carlo constants record their seed and sample count")

    def to_dict(self) -> dict:
        d = {"id": self.id, "value": self.value, "method": self.method.value,
             "uncertainty": self.uncertainty,
             "tuple": None if self.tuple is None else self.tuple.to_dict()}
        if self.method is Method.MonteCarlo:
            d["seed"] = self.seed
            d["samples"] = self.samples
        if self.extras:
            d["extras"] = self.extras
        return d


def _range(msg: str, name: str, value: float):
    raise RangeViolation(msg, [Residual(name, "range", value)])


def _open_p(p: float, lo: float = 1.0, hi: float = math.inf):
    if not (lo < p < hi):
        _range(f"need {lo:g} < p < {hi:g}, got p={p!r}", f"{lo:g} < p < {hi:g}",
               lo - p if p <= lo else p - hi)


# ------------------------------------------------------------ Hardy family

def hardy_constant(p: float) -> ConstantValue:
    """p/(p−1), the unweighted Hardy constant."""
    p = float(p)
    _open_p(p)
    return ConstantValue("hardy", p / (p - 1.0), Method.ClosedForm,
                         tuple=assemble(Family.HardyWeighted, p=p, q=p))


def log_bliss(p: float, q: float) -> float:
    pp = dual(p)
    r = 1.0 / (1.0 / p - 1.0 / q)
    qp = dual(q)
    bracket = math.log(q / r) + log_gamma(r) - log_gamma(r / q) - log_gamma(r / qp)
    return math.log(pp / q) / q + bracket / r


def bliss_constant(p: float, q: float) -> ConstantValue:
    """C_{p,q} = (p'/q)^{1/q} [(q/r) Γ(r) / (Γ(r/q) Γ(r/q'))]^{1/r}, 1/r = 1/p − 1/q."""
    t = derive(Family.HardyWeighted, p=p, q=q)
    return ConstantValue("bliss", math.exp(log_bliss(t.p, t.q)), Method.ClosedForm, tuple=t)


def tensor_hardy_constant(p: float, q: float | None = None, m: int = 2) -> ConstantValue:
    """(p/(p−1))^m for T⊗…⊗T, or C_{p,q}^m for S⊗…⊗S when q > p."""
    if q is None or q == p:
        base = hardy_constant(p)
        return ConstantValue("tensor-hardy", base.value ** m, Method.ClosedForm, tuple=base.tuple)
    base = bliss_constant(p, q)
    return ConstantValue("tensor-hardy", math.exp(m * log_bliss(base.tuple.p, base.tuple.q)),
                         Method.ClosedForm, tuple=base.tuple)


def ball_log_volume(n: int) -> float:
    return 0.5 * n * LOG_PI - log_gamma(0.5 * n + 1.0)


def averaging_constant(n: int, p: float, q: float) -> ConstantValue:
    """vol(B)^{−1/r} C_{p,q} for the n-dimensional averaging operator W."""
    if q == p:
        c = hardy_constant(p)
        return ConstantValue("averaging", c.value, Method.ClosedForm, tuple=c.tuple)
    t = derive(Family.HardyWeighted, p=p, q=q)
    lv = ball_log_volume(n) / t.r
    return ConstantValue("averaging", math.exp(log_bliss(t.p, t.q) - lv), Method.ClosedForm,
                         tuple=t)


# ------------------------------------------------------------ Young family

def _tuple_of(family: Family, tup) -> ExponentTuple:
    if isinstance(tup, ExponentTuple):
        t = derive(tup.family, p=tup.p, q=tup.q, m=tup.m, n=tup.n, s=tup.s, beta=tup.beta)
    else:
        t = derive(family, **dict(tup))
    if t.family is not family:
        raise ConstraintViolation(f"expected a {family.value} tuple, got {t.family.value}")
    return t


def young_l2_constant(tup) -> ConstantValue:
    """[2^{−m} q'^{2/q'} ∏ s_k^{2/s_k} ∏ λ_ℓ^{λ_ℓ}]^{n/4}."""
    t = _tuple_of(Family.YoungL2, tup)
    qp = t.q_prime
    lg = (-t.m * math.log(2.0) + (2.0 / qp) * math.log(qp)
          + sum((2.0 / s) * math.log(s) for s in t.s)
          + math.log(lambda_product(t.lambda_)))
    return ConstantValue("young-l2", math.exp(0.25 * t.n * lg), Method.ClosedForm, tuple=t)


def unit_bound(theorem: str, tup) -> ConstantValue:
    """C = 1 for the multilinear Young bounds proved with the classical constant."""
    fam = Family.MYoungRestricted if theorem == "multilinear-young-restricted" else Family.MYoung
    t = _tuple_of(fam, tup)
    return ConstantValue(theorem, 1.0, Method.ClosedForm, tuple=t,
                         extras={"kind": "upper bound, not known to be sharp"})


def _exp_density_gamma_bracket(p: float) -> float:
    return (log_gamma(2 * p / (2 - p)) - log_gamma(2 / (2 - p)) - log_gamma(p / (2 - p)))


def exp_density_constant(p: float) -> ConstantValue:
    """Sharp C_p in ‖e^{−|x|} ∗ f‖_{p'} ≤ C_p ‖f‖_p on the line, 1 < p < 2.

    C_p = p'^{2/p − 2} [Γ(2p/(2−p)) / (Γ(2/(2−p)) Γ(p/(2−p)))]^{2/p − 1},
    which equals 2 p'^{2/p − 3} C_{p,2}^2.
    """
    p = float(p)
    _open_p(p, 1.0, 2.0)
    pp = dual(p)
    lg = (2 / p - 2) * math.log(pp) + (2 / p - 1) * _exp_density_gamma_bracket(p)
    return ConstantValue("exp-density", math.exp(lg), Method.ClosedForm,
                         tuple=derive(Family.ExpDensity, p=p))


def exp_density_constant_printed(p: float) -> ConstantValue:
    """(p'/2)^{2/p} [same Γ bracket]^{2/p − 1}; kept for comparison, not sharp."""
    p = float(p)
    _open_p(p, 1.0, 2.0)
    pp = dual(p)
    lg = (2 / p) * math.log(pp / 2) + (2 / p - 1) * _exp_density_gamma_bracket(p)
    return ConstantValue("exp-density-printed", math.exp(lg), Method.ClosedForm,
                         tuple=derive(Family.ExpDensity, p=p))


# ------------------------------------------------------------ trace constants

def trace_l2_constant(m: int, q: float) -> ConstantValue:
    """Norm of H ↦ x^γ (T⊗…⊗T H)(x,…,x) from L²(Λ_m) to L^q(0,∞), γ = m/2 − 1/q.

    q = 2 gives 2/√m.  For q > 2 the symmetric dual form equals
    (1/q)‖x^{1/2−1/q} T u‖_2² after an integration by parts, so
    C = √(2/q) (2/(mq))^{1/q} C_{q',2}.
    """
    t = derive(Family.TraceL2, q=q, m=m)
    if t.m < 2:
        _range("trace constants need m >= 2", "m >= 2", 2 - t.m)
    if t.q == 2.0:
        return ConstantValue("trace-l2", 2.0 / math.sqrt(t.m), Method.ClosedForm, tuple=t)
    b = bliss_constant(t.q_prime, 2.0)
    lg = 0.5 * math.log(2.0 / t.q) + math.log(2.0 / (t.m * t.q)) / t.q + math.log(b.value)
    return ConstantValue("trace-l2", math.exp(lg), Method.ClosedForm, tuple=t)


def trace_l2_constant_printed(m: int, q: float) -> ConstantValue:
    """√2 (2/(mq))^{1/q} √C_{q',q}; an upper bound for q > 2, kept for comparison."""
    t = derive(Family.TraceL2, q=q, m=m)
    if t.q == 2.0:
        return trace_l2_constant(m, q)
    b = bliss_constant(t.q_prime, t.q)
    lg = 0.5 * math.log(2.0) + math.log(2.0 / (t.m * t.q)) / t.q + 0.5 * math.log(b.value)
    return ConstantValue("trace-l2-printed", math.exp(lg), Method.ClosedForm, tuple=t)


def hilbert_constant(p: float) -> ConstantValue:
    """Γ(1/p) Γ(1/p') = π / sin(π/p)."""
    p = float(p)
    _open_p(p)
    return ConstantValue("hilbert", math.pi / math.sin(math.pi / p), Method.ClosedForm,
                         tuple=assemble(Family.HardyWeighted, p=p, q=p))


def _x_over_sinh_power(m: int):
    def f(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(over="ignore"):
            ratio = np.where(x == 0, 1.0, x / np.sinh(np.where(x == 0, 1.0, x)))
        return ratio ** m
    return f


def hilbert_trace_constant(m: int, tol: float = 1e-13) -> ConstantValue:
    """2 [∫_0^∞ (x/sinh x)^m dx]^{1/2} by tanh–sinh quadrature."""
    if m < 2:
        _range("need m >= 2", "m >= 2", 2 - m)
    res = integrate_1d(_x_over_sinh_power(m), 0.0, math.inf, tol=tol)
    if not res.converged:
        raise NonConvergence("quadrature for the Hilbert trace constant", res.value, res.error)
    val = 2.0 * math.sqrt(res.value)
    unc = res.error / math.sqrt(res.value)
    return ConstantValue("hilbert-trace", val, Method.Quadrature, unc,
                         extras={"integral": res.value, "levels": res.levels})


# ------------------------------------------------------------ diagonal families

def _diag_young_log_phi(t: ExponentTuple, log_rho: float) -> float:
    rho = math.exp(log_rho)
    return (t.m / t.p_prime) * log_rho - (t.m - 1) * math.log1p(t.m * rho)


def diag_young_constant(tup, check_tol: float = 1e-8) -> ConstantValue:
    """sup_ρ [ρ^{m/p'} / (1+mρ)^{m−1}]^{n/2} [p^{m/p} q^{m(m−1)/(2q)}]^{n/2}.

    For p < m the supremum sits at ρ* = 1/(2q−m) and is confirmed by a
    golden-section search in log ρ; at p = m it is the limit ρ → ∞,
    [m / 2^{m−1}]^{n/2}, which is never attained.
    """
    t = _tuple_of(Family.DiagYoung, tup)
    m, n, p, q = t.m, t.n, t.p, t.q
    tail = (m / p) * math.log(p) + (m * (m - 1) / (2 * q)) * math.log(q)
    extras = {}
    if 2 * q - m > 1e-12 * m:
        rho = 1.0 / (2 * q - m)
        log_phi = _diag_young_log_phi(t, math.log(rho))
        opt = golden_section(lambda u: _diag_young_log_phi(t, u),
                             math.log(rho) - 30.0, math.log(rho) + 30.0, tol=1e-12)
        gap = abs(opt.value - log_phi)
        if gap > check_tol:
            raise NonConvergence("golden-section check disagrees with the closed form",
                                 opt.value, gap)
        extras = {"rho_star": rho, "golden_section_log_gap": gap}
        lg = 0.5 * n * (log_phi + tail)
    else:
        lg = 0.5 * n * (math.log(m) - (m - 1) * math.log(2.0))
        extras = {"attained": False}
    return ConstantValue("diag-young", math.exp(lg), Method.ClosedForm, tuple=t, extras=extras)


def mhls_log_prefactor(n: int, m: int, p_prime: float) -> float:
    """log [(4π)^{n/2} Γ(n/2) / Γ(n)]^{m/p'}."""
    return (m / p_prime) * (0.5 * n * math.log(4 * math.pi) + log_gamma(0.5 * n) - log_gamma(n))


def diag_mhls_constant(tup, samples: int = 10**6, seed: int = 42,
                       workers: int | None = None) -> ConstantValue:
    """[(4π)^{n/2} Γ(n/2)/Γ(n)]^{m/p'} ∫_{(S^n)^m} ∏_{i<j} |ξ_i − ξ_j|^{−γ} dξ.

    The sphere-side constant D (same integral, no prefactor) is reported
    in ``extras``.
    """
    t = _tuple_of(Family.DiagMHLS, tup)
    est = estimate_sphere_product_integral(t.n, t.m, t.gamma, samples, seed, workers)
    pref = math.exp(mhls_log_prefactor(t.n, t.m, t.p_prime))
    extras = {"D": est.mean, "D_stderr": est.stderr, "prefactor": pref}
    return ConstantValue("diag-mhls", pref * est.mean, Method.MonteCarlo, pref * est.stderr,
                         tuple=t, seed=seed, samples=samples, extras=extras)


def lieb_hls_constant(n: int, lam: float) -> float:
    """Sharp constant of ∬ f(x)|x−y|^{−λ} f(y) ≤ C ‖f‖_t², t = 2n/(2n−λ)."""
    lg = (0.5 * lam * LOG_PI + log_gamma(0.5 * (n - lam)) - log_gamma(n - 0.5 * lam)
          + (-1.0 + lam / n) * (log_gamma(0.5 * n) - log_gamma(n)))
    return math.exp(lg)


def _trace_fractional_tuple(tup) -> ExponentTuple:
    t = _tuple_of(Family.TraceFractional, tup)
    if t.p != 2.0:
        raise ConstraintViolation("the sharp trace-fractional constant is for p = 2")
    if not t.q > 2.0:
        _range("Γ(n/2 − n/q) has a pole at q = 2", "q > 2 (Γ pole)", 2.0 - t.q)
    return t


def trace_fractional_constant(tup, samples: int = 10**6, seed: int = 42, eta=None,
                              workers: int | None = None) -> ConstantValue:
    """√(B · C_HLS(n, 2n/q)) for the diagonal trace of the ρ-kernel fractional integral."""
    t = _trace_fractional_tuple(tup)
    est = estimate_B_integral(t.n, t.m, t.alpha, samples, seed, eta, workers)
    hls = lieb_hls_constant(t.n, 2 * t.n / t.q)
    val = math.sqrt(est.mean * hls)
    unc = 0.5 * val * est.stderr / est.mean
    return ConstantValue("trace-fractional", val, Method.MonteCarlo, unc, tuple=t, seed=seed,
                         samples=samples,
                         extras={"B": est.mean, "B_stderr": est.stderr, "hls": hls})


def trace_fractional_constant_printed(tup, samples: int = 10**6, seed: int = 42,
                                      workers: int | None = None) -> ConstantValue:
    """√B π^{n/2q} [Γ(n/2−n/q)/Γ(n)]^{1/2} [Γ(n)/Γ(n/q')]^{1/q'}; kept for comparison."""
    t = _trace_fractional_tuple(tup)
    n, q, qp = t.n, t.q, t.q_prime
    est = estimate_B_integral(n, t.m, t.alpha, samples, seed, None, workers)
    lg = (0.5 * math.log(est.mean) + (n / (2 * q)) * LOG_PI
          + 0.5 * (log_gamma(n / 2 - n / q) - log_gamma(n))
          + (log_gamma(n) - log_gamma(n / qp)) / qp)
    val = math.exp(lg)
    return ConstantValue("trace-fractional-printed", val, Method.MonteCarlo,
                         0.5 * val * est.stderr / est.mean, tuple=t, seed=seed, samples=samples)


# ------------------------------------------------------------ catalog

class TheoremId(str, Enum):
    hardy = "hardy"
    bliss = "bliss"
    tensor_hardy = "tensor-hardy"
    averaging = "averaging"
    group_convolution = "group-convolution"
    young_line = "young-line"
    young_l2 = "young-l2"
    multilinear_young_restricted = "multilinear-young-restricted"
    multilinear_young_extension = "multilinear-young-extension"
    multilinear_young = "multilinear-young"
    mhls_riesz = "mhls-riesz"
    exp_density = "exp-density"
    diag_trace = "diag-trace"
    trace_l2 = "trace-l2"
    hilbert = "hilbert"
    hilbert_trace = "hilbert-trace"
    trace_fractional = "trace-fractional"
    diag_young = "diag-young"
    diag_mhls = "diag-mhls"
    stein_weiss = "stein-weiss"


def _extension_bound(tup) -> ConstantValue:
    t = _tuple_of(Family.MYoung, tup)
    if t.m != 2:
        raise ConstraintViolation("the extension theorem is the m = 2 case")
    return ConstantValue("multilinear-young-extension", 1.0, Method.ClosedForm, tuple=t,
                         extras={"kind": "upper bound, not known to be sharp"})


# None marks theorems whose sharp constant is not available: the HLS bound and
# the general diagonal trace are stated without one, D_{p,q} on the line is not
# given explicitly, and Stein–Weiss only has an empirical supremum.
CATALOG: dict[TheoremId, Callable | None] = {
    TheoremId.hardy: hardy_constant,
    TheoremId.bliss: bliss_constant,
    TheoremId.tensor_hardy: tensor_hardy_constant,
    TheoremId.averaging: averaging_constant,
    TheoremId.group_convolution: bliss_constant,
    TheoremId.young_line: None,
    TheoremId.young_l2: young_l2_constant,
    TheoremId.multilinear_young_restricted:
        lambda tup: unit_bound("multilinear-young-restricted", tup),
    TheoremId.multilinear_young_extension: _extension_bound,
    TheoremId.multilinear_young: lambda tup: unit_bound("multilinear-young", tup),
    TheoremId.mhls_riesz: None,
    TheoremId.exp_density: exp_density_constant,
    TheoremId.diag_trace: None,
    TheoremId.trace_l2: trace_l2_constant,
    TheoremId.hilbert: hilbert_constant,
    TheoremId.hilbert_trace: hilbert_trace_constant,
    TheoremId.trace_fractional: trace_fractional_constant,
    TheoremId.diag_young: diag_young_constant,
    TheoremId.diag_mhls: diag_mhls_constant,
    TheoremId.stein_weiss: None,
}


def default_catalog(samples: int = 10**5, seed: int = 42) -> list[dict]:
    """Every catalog entry at a representative parameter point."""
    entries: list[dict] = []

    def add(tid: TheoremId, make):
        if CATALOG[tid] is None:
            entries.append({"id": tid.value, "value": None, "method": None,
                            "note": "no closed-form sharp constant; see empirical estimates"})
        else:
            entries.append(make().to_dict() | {"id": tid.value})

    add(TheoremId.hardy, lambda: hardy_constant(2.0))
    add(TheoremId.bliss, lambda: bliss_constant(2.0, 4.0))
    add(TheoremId.tensor_hardy, lambda: tensor_hardy_constant(2.0, 4.0, 2))
    add(TheoremId.averaging, lambda: averaging_constant(3, 2.0, 4.0))
    add(TheoremId.group_convolution, lambda: bliss_constant(2.0, 4.0))
    add(TheoremId.young_line, None)
    add(TheoremId.young_l2,
        lambda: young_l2_constant(dict(q=2.0, m=2, n=1, s=(4 / 3, 4 / 3))))
    add(TheoremId.multilinear_young_restricted,
        lambda: unit_bound("multilinear-young-restricted",
                           dict(p=1.25, q=2.0, m=2, n=1, s=_restricted_s())))
    add(TheoremId.multilinear_young_extension,
        lambda: _extension_bound(dict(p=1.5, q=3.0, m=2, n=1, s=(2.0, 2.0))))
    add(TheoremId.multilinear_young,
        lambda: unit_bound("multilinear-young", dict(p=1.5, q=3.0, m=2, n=1, s=(2.0, 2.0))))
    add(TheoremId.mhls_riesz, None)
    add(TheoremId.exp_density, lambda: exp_density_constant(1.5))
    add(TheoremId.diag_trace, None)
    add(TheoremId.trace_l2, lambda: trace_l2_constant(2, 2.0))
    add(TheoremId.hilbert, lambda: hilbert_constant(2.0))
    add(TheoremId.hilbert_trace, lambda: hilbert_trace_constant(2))
    add(TheoremId.trace_fractional,
        lambda: trace_fractional_constant(dict(p=2.0, q=4.0, m=2, n=1), samples, seed))
    add(TheoremId.diag_young, lambda: diag_young_constant(dict(p=2.0, m=2, n=1)))
    add(TheoremId.diag_mhls,
        lambda: diag_mhls_constant(dict(p=2.0, m=3, n=1), samples, seed))
    add(TheoremId.stein_weiss, None)
    return entries


def _restricted_s() -> tuple:
    # m = 2, p = 5/4 (p' = 5), q = 2 (q' = 2): p'/q' = 5/2 > m, Σ 1/s = 1/2 + 2/5
    s = 1.0 / 0.45
    return (s, s)
