"""Special functions, quadrature and derivative-free maximization."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .errors import DomainError, MaxIterExceeded, NonConvergence


def log_gamma(x: float) -> float:
    """log Γ(x) for x > 0."""
    x = float(x)
    if not x > 0 or not math.isfinite(x):
        raise DomainError(f"log_gamma needs a finite positive argument, got {x!r}")
    return math.lgamma(x)


def log_beta(a: float, b: float) -> float:
    return log_gamma(a) + log_gamma(b) - log_gamma(a + b)


def lambda_product(lam) -> float:
    """∏ λ^λ with the continuity convention 0^0 = 1."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise DomainError("weights must be nonnegative")
    pos = lam[lam > 0]
    return float(np.exp(np.sum(pos * np.log(pos))))


# ---------------------------------------------------------------- quadrature

class RuleKind(str, Enum):
    GaussLegendre = "GaussLegendre"
    TanhSinh = "TanhSinh"


class DomainMap(str, Enum):
    Unit = "Unit"
    HalfLineExp = "HalfLineExp"
    HalfLineAlgebraic = "HalfLineAlgebraic"
    RealLine = "RealLine"


@dataclass(frozen=True)
class QuadratureRule:
    kind: RuleKind
    nodes: np.ndarray
    weights: np.ndarray
    domain_map: DomainMap

    def integrate(self, f: Callable) -> float:
        return float(np.dot(self.weights, _call(f, self.nodes)))


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    levels: int
    converged: bool


def gauss_legendre(order: int, a: float = -1.0, b: float = 1.0) -> QuadratureRule:
    x, w = np.polynomial.legendre.leggauss(order)
    half = 0.5 * (b - a)
    return QuadratureRule(RuleKind.GaussLegendre, a + half * (x + 1.0), half * w, DomainMap.Unit)


def _call(f, x):
    y = f(x)
    y = np.asarray(y, dtype=float)
    if y.shape != np.shape(x):
        y = np.array([float(f(v)) for v in np.ravel(x)]).reshape(np.shape(x))
    return y


def _ts_points(t: np.ndarray, a: float, b: float, dmap: DomainMap):
    """Abscissae and Jacobians for the double-exponential maps at parameters t.

    Near a finite endpoint the abscissa is built from the endpoint plus an
    accurately computed offset so singular integrands are sampled correctly.
    """
    u = 0.5 * math.pi * np.sinh(t)
    du = 0.5 * math.pi * np.cosh(t)
    with np.errstate(all="ignore"):
        if dmap is DomainMap.Unit:
            half = 0.5 * (b - a)
            # 1 - tanh(u) = 2/(e^{2u}+1) and 1 + tanh(u) = 2/(e^{-2u}+1)
            left = 2.0 / (np.exp(-2.0 * u) + 1.0)
            right = 2.0 / (np.exp(2.0 * u) + 1.0)
            x = np.where(t < 0, a + half * left, b - half * right)
            jac = half * du / np.cosh(u) ** 2
        elif dmap is DomainMap.HalfLineExp:
            e = np.exp(u)
            x = a + e
            jac = du * e
        elif dmap is DomainMap.RealLine:
            x = np.sinh(u)
            jac = du * np.cosh(u)
        elif dmap is DomainMap.HalfLineAlgebraic:
            # tanh-sinh on (0,1) followed by s -> s/(1-s)
            left = 1.0 / (np.exp(-2.0 * u) + 1.0)
            one_minus = 1.0 / (np.exp(2.0 * u) + 1.0)
            s = left
            x = a + s / one_minus
            jac = (0.5 * du / np.cosh(u) ** 2) / one_minus ** 2
        else:  # pragma: no cover
            raise ValueError(dmap)
    ok = np.isfinite(x) & np.isfinite(jac) & (jac > 0)
    if dmap is DomainMap.Unit:
        ok &= (x > a) & (x < b)
    elif dmap in (DomainMap.HalfLineExp, DomainMap.HalfLineAlgebraic):
        ok &= x > a
    return x[ok], jac[ok], ok


_TMAX = {DomainMap.Unit: 6.5, DomainMap.HalfLineExp: 4.5,
         DomainMap.RealLine: 4.5, DomainMap.HalfLineAlgebraic: 6.5}
_TMIN = {DomainMap.HalfLineExp: 6.5}


def tanh_sinh_rule(level: int, a: float = -1.0, b: float = 1.0,
                   domain_map: DomainMap = DomainMap.Unit) -> QuadratureRule:
    """Double-exponential rule with step 2^-level (includes the Jacobian)."""
    h = 2.0 ** -level
    tmax = _TMAX[domain_map]
    tmin = _TMIN.get(domain_map, tmax)
    t = np.arange(-math.floor(tmin / h), math.floor(tmax / h) + 1) * h
    x, jac, _ = _ts_points(t, a, b, domain_map)
    w = h * jac
    keep = w > 0
    x, w = x[keep], w[keep]
    order = np.argsort(x, kind="stable")
    x, w = x[order], w[order]
    uniq = np.concatenate(([True], np.diff(x) > 0))
    return QuadratureRule(RuleKind.TanhSinh, x[uniq], w[uniq], domain_map)


def _pick_map(a: float, b: float, domain_map):
    if domain_map is not None:
        return DomainMap(domain_map)
    if math.isfinite(a) and math.isfinite(b):
        return DomainMap.Unit
    if math.isfinite(a) and b == math.inf:
        return DomainMap.HalfLineExp
    if a == -math.inf and b == math.inf:
        return DomainMap.RealLine
    raise DomainError("unsupported interval; reflect (-inf, b] to [-b, inf) first")


def integrate_1d(f: Callable, a: float, b: float, tol: float = 1e-12,
                 domain_map: DomainMap | str | None = None, rule: str = "tanh-sinh",
                 max_level: int = 12, order: int = 64, strict: bool = True) -> QuadResult:
    """Integrate ``f`` over (a, b); ``f`` must accept numpy arrays.

    The error estimate is the change between successive halvings of the
    step, judged against ``tol * max(1, |I|)``.
    """
    if rule == "gauss-legendre":
        if not (math.isfinite(a) and math.isfinite(b)):
            raise DomainError("Gauss-Legendre needs a finite interval")
        lo = gauss_legendre(order, a, b).integrate(f)
        hi = gauss_legendre(2 * order, a, b).integrate(f)
        err = abs(hi - lo)
        ok = err <= tol * max(1.0, abs(hi))
        if strict and not ok:
            raise NonConvergence("Gauss-Legendre did not converge", hi, err)
        return QuadResult(hi, err, 2, ok)

    dmap = _pick_map(a, b, domain_map)
    tmax = _TMAX[dmap]
    tmin = _TMIN.get(dmap, tmax)

    def partial(ts):
        x, jac, _ = _ts_points(ts, a, b, dmap)
        if x.size == 0:
            return 0.0
        y = _call(f, x)
        prod = y * jac
        prod = prod[np.isfinite(prod)]
        return float(np.sum(prod))

    h = 1.0
    t0 = np.arange(-math.floor(tmin), math.floor(tmax) + 1, dtype=float)
    total = partial(t0)
    prev = h * total
    err = math.inf
    for level in range(1, max_level + 1):
        h *= 0.5
        kmin = -math.floor(tmin / h)
        kmax = math.floor(tmax / h)
        k = np.arange(kmin, kmax + 1)
        k = k[k % 2 != 0]
        total += partial(k * h)
        cur = h * total
        err = abs(cur - prev)
        if level >= 3 and err <= tol * max(1.0, abs(cur)):
            return QuadResult(cur, err, level, True)
        prev = cur
    if strict:
        raise NonConvergence(f"tanh-sinh did not reach tol={tol:g}", prev, err)
    return QuadResult(prev, err, max_level, False)


# -------------------------------------------------------------- optimization

@dataclass
class OptimResult:
    argmax: np.ndarray
    value: float
    iterations: int
    converged: bool
    tolerance: float
    evaluations: int = 0
    history: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {"argmax": [float(v) for v in np.atleast_1d(self.argmax)],
                "value": float(self.value), "iterations": int(self.iterations),
                "converged": bool(self.converged), "tolerance": float(self.tolerance)}


def _as_box(box, dim):
    lo = np.array([b[0] for b in box], dtype=float)
    hi = np.array([b[1] for b in box], dtype=float)
    if lo.shape != (dim,) or np.any(~(lo < hi)):
        raise DomainError("box must give lo < hi for every coordinate")
    return lo, hi


def _nm_single(g, x0, lo, hi, tol, max_iter, step):
    """One Nelder-Mead run minimizing g.  Returns (x, fx, iters, converged, evals)."""
    dim = x0.size
    simplex = np.empty((dim + 1, dim))
    simplex[0] = x0
    for i in range(dim):
        v = x0.copy()
        d = step[i]
        v[i] = v[i] + d if v[i] + d <= hi[i] else v[i] - d
        simplex[i + 1] = v
    fs = np.array([g(v) for v in simplex])
    evals = dim + 1
    it = 0
    while it < max_iter:
        order = np.argsort(fs, kind="stable")
        simplex, fs = simplex[order], fs[order]
        diam = float(np.max(np.abs(simplex[1:] - simplex[0]))) if dim else 0.0
        if diam < tol:
            return simplex[0], fs[0], it, True, evals
        it += 1
        centroid = simplex[:-1].mean(axis=0)
        xr = centroid + (centroid - simplex[-1])
        fr = g(xr)
        evals += 1
        if fr < fs[0]:
            xe = centroid + 2.0 * (centroid - simplex[-1])
            fe = g(xe)
            evals += 1
            if fe < fr:
                simplex[-1], fs[-1] = xe, fe
            else:
                simplex[-1], fs[-1] = xr, fr
        elif fr < fs[-2]:
            simplex[-1], fs[-1] = xr, fr
        else:
            if fr < fs[-1]:
                xc = centroid + 0.5 * (xr - centroid)
            else:
                xc = centroid + 0.5 * (simplex[-1] - centroid)
            fc = g(xc)
            evals += 1
            if fc < min(fr, fs[-1]):
                simplex[-1], fs[-1] = xc, fc
            else:
                simplex[1:] = simplex[0] + 0.5 * (simplex[1:] - simplex[0])
                fs[1:] = [g(v) for v in simplex[1:]]
                evals += dim
    order = np.argsort(fs, kind="stable")
    return simplex[order[0]], fs[order[0]], it, False, evals


def nelder_mead(objective: Callable, x0, box, tol: float = 1e-10, max_iter: int = 5000,
                restarts: int = 5, seed: int = 0, penalty: float = 1e6,
                raise_on_maxiter: bool = False) -> OptimResult:
    """Maximize ``objective`` over a box.

    Points outside the box are evaluated at their clamp and penalized by
    the squared distance, so the objective itself only ever sees feasible
    arguments.  The run from ``x0`` is followed by ``restarts`` runs from
    uniformly drawn starting points; each run is then polished once from its
    own optimum.  The best run wins.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    lo, hi = _as_box(box, x0.size)
    if np.any(x0 < lo) or np.any(x0 > hi):
        raise DomainError("x0 must lie inside the box")

    def g(x):
        xc = np.clip(x, lo, hi)
        val = float(objective(xc))
        if not math.isfinite(val):
            val = -1e300
        return -val + penalty * float(np.sum((x - xc) ** 2))

    rng = np.random.default_rng(seed)
    starts = [x0] + [lo + (hi - lo) * rng.random(x0.size) for _ in range(restarts)]
    step0 = 0.1 * (hi - lo)
    best = None
    total_it = 0
    total_ev = 0
    all_conv = True
    for xs in starts:
        x, fx, it, conv, ev = _nm_single(g, xs, lo, hi, tol, max_iter, step0)
        total_it += it
        total_ev += ev
        if conv:
            step = np.maximum(100 * tol, 1e-3 * (hi - lo))
            x2, fx2, it2, conv2, ev2 = _nm_single(g, x, lo, hi, tol, max_iter, step)
            total_it += it2
            total_ev += ev2
            if fx2 <= fx:
                x, fx, conv = x2, fx2, conv2
        if best is None or fx < best[1]:
            best = (x, fx, conv)
        all_conv &= conv
    xbest = np.clip(best[0], lo, hi)
    res = OptimResult(xbest, float(objective(xbest)), total_it, bool(best[2]), tol, total_ev)
    if not best[2] and raise_on_maxiter:
        raise MaxIterExceeded(f"Nelder-Mead exhausted {max_iter} iterations", res)
    return res


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(objective: Callable, lo: float, hi: float, tol: float = 1e-10,
                   max_iter: int = 500) -> OptimResult:
    """Maximize a unimodal function on [lo, hi]."""
    if not lo < hi:
        raise DomainError("golden_section needs lo < hi")
    a, b = float(lo), float(hi)
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = objective(c), objective(d)
    it = 0
    while b - a >= tol and it < max_iter:
        it += 1
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = objective(d)
    x = c if fc >= fd else d
    return OptimResult(np.array([x]), float(objective(x)), it, b - a < tol, tol)
