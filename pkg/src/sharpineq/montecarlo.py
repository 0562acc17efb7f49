"""Seeded Monte Carlo for singular integrals over products of spheres and R^{mn}.

Every estimate is a mean of importance weights.  Samples are produced in
fixed-size blocks; block ``b`` draws from a Philox stream keyed by
``(seed, b)``, and per-block moments are merged in block order, so the
result does not depend on how blocks are spread over threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import IntegrabilityError, VarianceBlowup
from .exponents import ExponentTuple, Family
from .numerics import log_beta, log_gamma

BLOCK_SIZE = 1 << 14
BLOWUP_RATIO = 5.0
LOG_PI = math.log(math.pi)


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    stderr: float
    samples: int
    seed: int
    batch_ratio: float = math.nan

    def to_dict(self) -> dict:
        return {"mean": self.mean, "stderr": self.stderr, "samples": self.samples,
                "seed": self.seed}

    def scaled(self, c: float) -> "MCEstimate":
        return MCEstimate(self.mean * c, self.stderr * abs(c), self.samples, self.seed,
                          self.batch_ratio)


def block_rng(seed: int, block: int) -> np.random.Generator:
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, block], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _block_stats(values: np.ndarray):
    n = values.size
    mu = float(np.mean(values))
    m2 = float(np.sum((values - mu) ** 2))
    return n, mu, m2


def _merge(a, b):
    na, ma, sa = a
    nb, mb, sb = b
    n = na + nb
    if n == 0:
        return 0, 0.0, 0.0
    d = mb - ma
    return n, ma + d * nb / n, sa + sb + d * d * na * nb / n


def run_blocks(weights: Callable[[np.random.Generator, int], np.ndarray], samples: int,
               seed: int, block_size: int = BLOCK_SIZE, workers: int | None = None,
               check: bool = True) -> MCEstimate:
    """Mean and standard error of ``weights(rng, count)`` over ``samples`` draws."""
    samples = int(samples)
    if samples < 2:
        raise ValueError("need at least two samples")
    nblocks = -(-samples // block_size)

    def one(b):
        count = min(block_size, samples - b * block_size)
        w = np.asarray(weights(block_rng(seed, b), count), dtype=float)
        if not np.all(np.isfinite(w)):
            raise VarianceBlowup(f"non-finite importance weight in block {b}")
        return _block_stats(w)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            stats = list(pool.map(one, range(nblocks)))
    else:
        stats = [one(b) for b in range(nblocks)]

    total = (0, 0.0, 0.0)
    for s in stats:
        total = _merge(total, s)
    n, mean, m2 = total
    var = m2 / (n - 1)
    stderr = math.sqrt(var / n)

    ratio = math.nan
    nbatch = min(32, nblocks)
    if nbatch >= 8:
        edges = np.linspace(0, nblocks, nbatch + 1).astype(int)
        means, sizes = [], []
        for lo, hi in zip(edges[:-1], edges[1:]):
            acc = (0, 0.0, 0.0)
            for s in stats[lo:hi]:
                acc = _merge(acc, s)
            sizes.append(acc[0])
            means.append(acc[1])
        means = np.array(means)
        sizes = np.array(sizes, dtype=float)
        between = float(np.sum(sizes * (means - mean) ** 2) / (nbatch - 1))
        batch_se = math.sqrt(between / n)
        ratio = batch_se / stderr if stderr > 0 else (0.0 if batch_se == 0 else math.inf)
    est = MCEstimate(mean, stderr, n, int(seed), ratio)
    if check and math.isfinite(ratio) and ratio > BLOWUP_RATIO:
        raise VarianceBlowup(f"batch-means spread is {ratio:.1f}x the CLT stderr", est)
    return est


# ------------------------------------------------------------------ spheres

def log_sphere_area(k: int) -> float:
    """log |S^k|, the k-dimensional sphere in R^{k+1}."""
    return math.log(2.0) + 0.5 * (k + 1) * LOG_PI - log_gamma(0.5 * (k + 1))


def sphere_sample(n: int, rng: np.random.Generator, size: int | None = None,
                  ambient: bool = True) -> np.ndarray:
    """Uniform points on S^n in R^{n+1} (``ambient``) or on S^{n-1} in R^n."""
    if n < 1:
        raise ValueError("n >= 1")
    d = n + 1 if ambient else n
    shape = (d,) if size is None else (size, d)
    z = rng.standard_normal(shape)
    if d == 1:
        return np.where(z >= 0, 1.0, -1.0)
    return z / np.linalg.norm(z, axis=-1, keepdims=True)


def _geodesic(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    chord = np.linalg.norm(a - b, axis=-1)
    return 2.0 * np.arcsin(np.clip(0.5 * chord, 0.0, 1.0))


class GeodesicPower:
    """Density on S^k (normalized measure) whose geodesic radius θ about a
    center has law (k-a) θ^{k-1-a} / π^{k-a} on [0, π]."""

    def __init__(self, k: int, a: float):
        if not 0 <= a < k:
            raise IntegrabilityError("geodesic power exponent must lie in [0, k)")
        self.k = k
        self.a = a
        self._const = (math.log(k - a) - (k - a) * LOG_PI + log_sphere_area(k)
                       - log_sphere_area(k - 1))

    def sample(self, rng, centers: np.ndarray):
        """Points about ``centers`` together with their exact geodesic radii."""
        count = centers.shape[0]
        theta = math.pi * rng.random(count) ** (1.0 / (self.k - self.a))
        z = rng.standard_normal(centers.shape)
        z -= np.sum(z * centers, axis=1, keepdims=True) * centers
        z /= np.linalg.norm(z, axis=1, keepdims=True)
        return np.cos(theta)[:, None] * centers + np.sin(theta)[:, None] * z, theta

    def logpdf_theta(self, theta: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return (self._const + (self.k - 1 - self.a) * np.log(theta)
                    - (self.k - 1) * np.log(np.sin(theta)))

    def logpdf(self, x: np.ndarray, centers: np.ndarray) -> np.ndarray:
        return self.logpdf_theta(_geodesic(x, centers))


def _logmeanexp(stack: np.ndarray) -> np.ndarray:
    top = np.max(stack, axis=0)
    top = np.where(np.isfinite(top), top, 0.0)
    return top + np.log(np.mean(np.exp(stack - top), axis=0))


def sphere_integrability_gate(n: int, m: int, gamma: float) -> None:
    if m < 2:
        raise IntegrabilityError("need at least two factors")
    if not (0 <= gamma < 2.0 * n / m):
        raise IntegrabilityError(
            f"pairwise kernel |xi-xj|^-{gamma} on (S^{n})^{m} needs 0 <= gamma < 2n/m")


def estimate_sphere_product_integral(n: int, m: int, gamma: float, samples: int = 10**6,
                                     seed: int = 42, workers: int | None = None
                                     ) -> MCEstimate:
    """∫_{(S^n)^m} ∏_{i<j} |ξ_i - ξ_j|^{-γ} over normalized surface measure."""
    sphere_integrability_gate(n, m, gamma)
    # the γ-law matches a single pair; the heavier law keeps the second
    # moment finite near multiple collisions
    local = [GeodesicPower(n, gamma), GeodesicPower(n, 0.5 * (n + gamma))] if gamma > 0 else []
    log_w = -math.log(1 + len(local))

    def weights(rng, count):
        rows = np.arange(count)
        pts = [sphere_sample(n, rng, count)]
        # exact chord to the point each sample was drawn around, or nan
        near_chord = [np.full(count, np.nan)]
        near_idx = [np.full(count, -1)]
        logq = np.zeros(count)
        for j in range(1, m):
            if not local:
                pts.append(sphere_sample(n, rng, count))
                continue
            x = sphere_sample(n, rng, count)
            pick = rng.integers(0, j, count)
            which = rng.integers(0, len(local) + 1, count)
            centers = np.stack(pts)[pick, rows]
            theta = np.full(count, np.nan)
            for c, law in enumerate(local, start=1):
                near, th = law.sample(rng, centers)
                sel = which == c
                x = np.where(sel[:, None], near, x)
                theta = np.where(sel, th, theta)
            drawn_near = which > 0
            th_all = []
            for i in range(j):
                th = _geodesic(x, pts[i])
                th_all.append(np.where(drawn_near & (pick == i), theta, th))
            parts = [np.full(count, log_w)]
            for law in local:
                parts.append(log_w + _logmeanexp(np.stack([law.logpdf_theta(t) for t in th_all])))
            logq += np.logaddexp.reduce(np.stack(parts), axis=0)
            pts.append(x)
            near_chord.append(np.where(drawn_near, 2.0 * np.sin(0.5 * theta), np.nan))
            near_idx.append(np.where(drawn_near, pick, -1))
        logk = np.zeros(count)
        if gamma > 0:
            for i in range(m):
                for j in range(i + 1, m):
                    d = np.linalg.norm(pts[i] - pts[j], axis=1)
                    d = np.where(near_idx[j] == i, near_chord[j], d)
                    logk -= gamma * np.log(d)
        return np.exp(logk - logq)

    return run_blocks(weights, samples, seed, workers=workers)


# ----------------------------------------------------------- R^d densities

class RadialAlgebraic:
    """Density ∝ ρ^{-a} (1+ρ)^{-b} on R^d with ρ = |y - center| / scale.

    The radius is scale·U/(1-U) with U ~ Beta(d-a, a+b-d), drawn as the
    ratio X/Y of independent Gamma(d-a) and Gamma(a+b-d) variables, which
    keeps resolution near the origin.
    """

    def __init__(self, d: int, a: float, b: float, scale: float = 1.0):
        if not (a < d and a + b > d):
            raise IntegrabilityError("radial density needs a < d < a + b")
        self.d, self.a, self.b, self.scale = d, a, b, scale
        self._lognorm = (d * math.log(scale) + log_sphere_area(d - 1)
                         + log_beta(d - a, a + b - d))

    def sample_offset(self, rng, count: int) -> np.ndarray:
        """Draws centered at the origin; add a center to shift them."""
        x = rng.standard_gamma(self.d - self.a, count)
        y = rng.standard_gamma(self.a + self.b - self.d, count)
        r = self.scale * x / y
        z = rng.standard_normal((count, self.d))
        z /= np.linalg.norm(z, axis=1, keepdims=True)
        return r[:, None] * z

    def sample(self, rng, count: int, center=None) -> np.ndarray:
        y = self.sample_offset(rng, count)
        return y if center is None else y + center

    def logpdf_radius(self, r: np.ndarray) -> np.ndarray:
        rho = r / self.scale
        with np.errstate(divide="ignore"):
            return -self.a * np.log(rho) - self.b * np.log1p(rho) - self._lognorm

    def logpdf(self, y: np.ndarray, center=None) -> np.ndarray:
        diff = y if center is None else y - center
        return self.logpdf_radius(np.linalg.norm(diff, axis=-1))


def riesz_composition_constant(n: int, lam1: float, lam2: float) -> float:
    """∫_{R^n} |e - y|^{-λ1} |y|^{-λ2} dy for a unit vector e."""
    if not (0 < lam1 < n and 0 < lam2 < n and lam1 + lam2 > n):
        raise IntegrabilityError("Riesz composition needs 0 < λi < n < λ1 + λ2")
    lg = (0.5 * n * LOG_PI + log_gamma((n - lam1) / 2) + log_gamma((n - lam2) / 2)
          + log_gamma((lam1 + lam2 - n) / 2) - log_gamma(lam1 / 2) - log_gamma(lam2 / 2)
          - log_gamma(n - (lam1 + lam2) / 2))
    return math.exp(lg)


def b_integrability_gate(n: int, m: int, alpha: float) -> None:
    dim = m * n
    if not (0 < alpha < dim / 2):
        raise IntegrabilityError(
            f"B-integral needs 0 < alpha < mn/2 = {dim / 2} (local exponent mn-alpha < mn, "
            f"tail exponent 2(mn-alpha) > mn); got alpha={alpha}")


def estimate_B_integral(n: int, m: int, alpha: float, samples: int = 10**6, seed: int = 42,
                        eta=None, workers: int | None = None) -> MCEstimate:
    """B = ∫_{R^{mn}} (Σ|η̂-y_k|)^{-(mn-α)} (Σ|y_k|)^{-(mn-α)} dy."""
    b_integrability_gate(n, m, alpha)
    dim = m * n
    lam = dim - alpha
    eta_hat = np.zeros(n) if eta is None else np.asarray(eta, dtype=float).reshape(n)
    if eta is None:
        eta_hat[0] = 1.0
    if abs(np.linalg.norm(eta_hat) - 1.0) > 1e-12:
        raise ValueError("eta must be a unit vector")
    center = np.tile(eta_hat, m)
    dens = RadialAlgebraic(dim, lam, lam)

    def weights(rng, count):
        z = dens.sample_offset(rng, count)
        shift = rng.random(count) < 0.5
        y = z + np.where(shift[:, None], center, 0.0)
        rz = np.linalg.norm(z, axis=1)
        r0 = np.where(shift, np.linalg.norm(y, axis=1), rz)
        r1 = np.where(shift, rz, np.linalg.norm(y - center, axis=1))
        logq = np.logaddexp(dens.logpdf_radius(r0), dens.logpdf_radius(r1)) + math.log(0.5)
        zb = z.reshape(count, m, n)
        yb = y.reshape(count, m, n)
        sz = np.sum(np.linalg.norm(zb, axis=2), axis=1)
        s0 = np.where(shift, np.sum(np.linalg.norm(yb, axis=2), axis=1), sz)
        s1 = np.where(shift, sz, np.sum(np.linalg.norm(yb - eta_hat, axis=2), axis=1))
        return np.exp(-lam * (np.log(s0) + np.log(s1)) - logq)

    return run_blocks(weights, samples, seed, workers=workers)


# ------------------------------------------------------- multilinear forms

@dataclass(frozen=True)
class RieszPairwise:
    gamma: float


@dataclass(frozen=True)
class GeneralG:
    """Pairwise kernel G(x_i - x_j) supplied by the caller.

    The library cannot decide integrability for an arbitrary G, so the caller
    must assert it through ``integrable``; ``local_exponent`` tells the
    sampler how singular G is at the origin.
    """
    kernel: Callable[[np.ndarray], np.ndarray]
    integrable: bool = False
    local_exponent: float = 0.0
    tail_exponent: float = 0.0


def _profile_traits(f):
    scale = float(getattr(f, "scale")())
    tail = float(getattr(f, "tail_exponent")())
    return scale, tail


def estimate_multilinear_lhs(f, kernel, tup: ExponentTuple, samples: int = 10**6,
                             seed: int = 42, beta: float | None = None,
                             workers: int | None = None) -> MCEstimate:
    """∫ ∏ f(|x_k|) |x_k|^{-β} ∏_{i<j} K(x_i - x_j) dx over (R^n)^m.

    ``f`` is a radial profile exposing ``log_value(r)``, ``scale()`` and
    ``tail_exponent()`` (see ``operators.RadialProfile``).  β defaults to the
    tuple's weight.  The first point is drawn from a heavy-tailed radial law
    whose tail matches the integrand's one-variable decay; later points mix
    that law with laws concentrated around earlier points.
    """
    n, m = tup.n, tup.m
    if m < 2:
        raise IntegrabilityError("need m >= 2 factors")
    beta = tup.beta if beta is None else float(beta)
    if isinstance(kernel, RieszPairwise):
        gam = float(kernel.gamma)
        if not (0 <= gam < 2.0 * n / m):
            raise IntegrabilityError(f"pairwise Riesz kernel needs 0 <= gamma < 2n/m, got {gam}")
        local_a, kern_tail = gam, gam
    elif isinstance(kernel, GeneralG):
        if not kernel.integrable:
            raise IntegrabilityError("GeneralG kernels need a caller-supplied integrability gate")
        local_a, kern_tail = kernel.local_exponent, kernel.tail_exponent
    else:
        raise TypeError("kernel must be RieszPairwise or GeneralG")
    if tup.family in (Family.DiagMHLS, Family.SteinWeiss) and isinstance(kernel, RieszPairwise):
        if tup.gamma is not None and abs(tup.gamma - kernel.gamma) > 1e-12 * max(1, tup.gamma):
            raise IntegrabilityError("kernel exponent does not match the tuple's gamma")
    if not 0 <= beta < n:
        raise IntegrabilityError("weight |x|^-beta needs 0 <= beta < n")

    scale, kappa = _profile_traits(f)
    tail = kappa + beta + (m - 1) * kern_tail
    tail = min(tail, n + 2.0)
    if tail <= n:
        raise IntegrabilityError("integrand does not decay fast enough in a single variable")
    base = RadialAlgebraic(n, beta, tail - beta, scale)
    heavy = 0.5 * (n + local_a)
    local = [RadialAlgebraic(n, local_a, tail - local_a, scale),
             RadialAlgebraic(n, heavy, tail - heavy, scale)]
    log_w = -math.log(1 + len(local))

    def weights(rng, count):
        rows = np.arange(count)
        x1 = base.sample(rng, count)
        pts = [x1]
        near_r = [np.full(count, np.nan)]
        near_idx = [np.full(count, -1)]
        near_z = [None]
        logq = base.logpdf(x1)
        for j in range(1, m):
            x = base.sample(rng, count)
            pick = rng.integers(0, j, count)
            which = rng.integers(0, len(local) + 1, count)
            centers = np.stack(pts)[pick, rows]
            z = np.zeros((count, n))
            for c, law in enumerate(local, start=1):
                sel = which == c
                z = np.where(sel[:, None], law.sample_offset(rng, count), z)
            drawn_near = which > 0
            x = np.where(drawn_near[:, None], centers + z, x)
            rz = np.linalg.norm(z, axis=1)
            r_all = []
            for i in range(j):
                r = np.linalg.norm(x - pts[i], axis=1)
                r_all.append(np.where(drawn_near & (pick == i), rz, r))
            parts = [log_w + base.logpdf(x)]
            for law in local:
                parts.append(log_w + _logmeanexp(np.stack([law.logpdf_radius(r) for r in r_all])))
            logq = logq + np.logaddexp.reduce(np.stack(parts), axis=0)
            pts.append(x)
            near_r.append(np.where(drawn_near, rz, np.nan))
            near_idx.append(np.where(drawn_near, pick, -1))
            near_z.append(z)
        logv = np.zeros(count)
        for x in pts:
            r = np.linalg.norm(x, axis=1)
            logv += f.log_value(r)
            if beta:
                logv -= beta * np.log(r)
        for i in range(m):
            for j in range(i + 1, m):
                exact = near_idx[j] == i
                if isinstance(kernel, RieszPairwise):
                    if kernel.gamma:
                        d = np.linalg.norm(pts[i] - pts[j], axis=1)
                        d = np.where(exact, near_r[j], d)
                        logv -= kernel.gamma * np.log(d)
                else:
                    diff = np.where(exact[:, None], -near_z[j], pts[i] - pts[j])
                    with np.errstate(divide="ignore"):
                        logv += np.log(kernel.kernel(diff))
        return np.exp(logv - logq)

    return run_blocks(weights, samples, seed, workers=workers)


def self_normalization(density, samples: int = 10**5, seed: int = 0) -> MCEstimate:
    """Integrate an importance density under an unrelated proposal; the mean must be 1.

    ``RadialAlgebraic`` densities are checked against a heavy-tailed radial
    law, ``GeodesicPower`` densities against the uniform law on the sphere.
    """
    if isinstance(density, GeodesicPower):
        k = density.k

        def weights(rng, count):
            c = np.zeros((count, k + 1))
            c[:, 0] = 1.0
            x = sphere_sample(k, rng, count)
            return np.exp(density.logpdf(x, c))
    else:
        d = density.d
        proposal = RadialAlgebraic(d, 0.0, d + 0.5, density.scale)

        def weights(rng, count):
            y = proposal.sample(rng, count)
            return np.exp(density.logpdf(y) - proposal.logpdf(y))
    return run_blocks(weights, samples, seed, check=False)
