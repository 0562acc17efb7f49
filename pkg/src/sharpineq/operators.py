"""Grid realizations of the Hardy-type operators.

Half-line functions live on log-uniform grids x_k = e^{kΔ} with integer k,
so 1 is always a node and grids with the same Δ line up exactly.  Lebesgue
weights are the trapezoid weights in log t (x_k Δ, halved at the ends);
Haar weights are Δ.  Norms add power-law (half-line) or exponential
(real line) tail estimates beyond the grid ends and refuse to proceed when
that estimate says a noticeable share of the norm lies off the grid.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np
from scipy.signal import fftconvolve, lfilter
from scipy.special import hyp2f1

from .errors import DomainError, GridTooCoarse, MeasureMismatch, ZeroNorm

HALF = "half"
REAL = "real"
SECTOR = "sector"
LEBESGUE = "lebesgue"
HAAR = "haar"

TAIL_SHARE = 1e-3


@dataclass(frozen=True)
class GridFunction:
    """Samples of a function on a grid together with quadrature weights.

    For ``domain == "sector"`` the values form an m-dimensional array over
    the product grid ``nodes^m`` and the weights are per axis.
    """
    nodes: np.ndarray
    values: np.ndarray
    weights: np.ndarray
    domain: str = HALF
    measure: str = LEBESGUE
    log_step: float | None = None
    k0: int | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        x = np.asarray(self.nodes, dtype=float)
        if x.ndim != 1 or x.size < 2 or np.any(np.diff(x) <= 0):
            raise DomainError("nodes must be strictly increasing")
        w = np.asarray(self.weights, dtype=float)
        if w.shape != x.shape or np.any(w <= 0):
            raise DomainError("weights must be positive, one per node")
        v = np.asarray(self.values, dtype=float)
        if self.domain == SECTOR:
            if v.shape != (x.size,) * v.ndim:
                raise DomainError("sector values must be a cube over the nodes")
        elif v.shape != x.shape:
            raise DomainError("values must match nodes")
        if self.measure == HAAR and self.domain != HALF:
            raise MeasureMismatch("Haar measure only lives on the half-line")
        object.__setattr__(self, "nodes", x)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.values.ndim

    def with_values(self, values) -> "GridFunction":
        return replace(self, values=np.asarray(values, dtype=float))

    def integral(self) -> float:
        return float(_tensor_sum(self.values, self.weights))

    def norm(self, p: float, tails: bool = True, max_tail: float = TAIL_SHARE) -> float:
        return lp_norm(self, p, tails=tails, max_tail=max_tail)

    def to_json(self) -> str:
        head = {"domain": self.domain, "measure": self.measure, "log_step": self.log_step,
                "k0": self.k0}
        return json.dumps({"header": head, "nodes": self.nodes.tolist(),
                           "values": self.values.tolist(), "weights": self.weights.tolist()})

    def to_csv(self) -> str:
        if self.dim != 1:
            raise DomainError("CSV export is for one-dimensional grids")
        buf = io.StringIO()
        buf.write("# " + json.dumps({"domain": self.domain, "measure": self.measure}) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["node", "value"])
        for x, v in zip(self.nodes, self.values):
            w.writerow([repr(float(x)), repr(float(v))])
        return buf.getvalue()


def _tensor_sum(values: np.ndarray, w: np.ndarray) -> float:
    out = values
    for _ in range(values.ndim):
        out = np.tensordot(out, w, axes=([0], [0]))
    return float(out)


# ------------------------------------------------------------------ grids

def log_grid(lo: float = 1e-6, hi: float = 1e6, nodes: int = 2**14,
             measure: str = LEBESGUE, step: float | None = None) -> GridFunction:
    """Zero function on a log-uniform grid covering [lo, hi] with 1 as a node.

    ``step`` fixes Δ directly; otherwise Δ is chosen so that roughly
    ``nodes`` nodes span the interval.
    """
    if not 0 < lo < hi:
        raise DomainError("need 0 < lo < hi")
    a, b = math.log(lo), math.log(hi)
    delta = step if step is not None else (b - a) / (nodes - 1)
    k0 = math.floor(a / delta + 1e-9)
    k1 = math.ceil(b / delta - 1e-9)
    k = np.arange(k0, k1 + 1)
    x = np.exp(k * delta)
    if measure == HAAR:
        w = np.full(x.size, delta)
    else:
        w = x * delta
    w[0] *= 0.5
    w[-1] *= 0.5
    return GridFunction(x, np.zeros_like(x), w, HALF, measure, delta, int(k0))


def real_grid(lo: float, hi: float, nodes: int) -> GridFunction:
    """Cell-centered uniform grid on [lo, hi]; every weight is the cell width."""
    h = (hi - lo) / nodes
    x = lo + h * (np.arange(nodes) + 0.5)
    return GridFunction(x, np.zeros_like(x), np.full(nodes, h), REAL, LEBESGUE)


def uniform_real_grid(half_width: float, step: float) -> GridFunction:
    """Node-centered uniform grid ..., -h, 0, h, ... with trapezoid weights."""
    k = math.ceil(half_width / step)
    x = np.arange(-k, k + 1) * step
    w = np.full(x.size, step)
    w[0] *= 0.5
    w[-1] *= 0.5
    return GridFunction(x, np.zeros_like(x), w, REAL, LEBESGUE, meta={"step": step})


def sample(grid: GridFunction, fn) -> GridFunction:
    return grid.with_values(np.asarray(fn(grid.nodes), dtype=float))


def sector_grid(axis: GridFunction, m: int, fn=None) -> GridFunction:
    """Product grid over the first orthant Λ_m sharing ``axis`` in every coordinate."""
    shape = (axis.nodes.size,) * m
    if fn is None:
        vals = np.zeros(shape)
    else:
        mesh = np.meshgrid(*([axis.nodes] * m), indexing="ij")
        vals = np.asarray(fn(*mesh), dtype=float)
    return GridFunction(axis.nodes, vals, axis.weights, SECTOR, LEBESGUE, axis.log_step,
                        axis.k0, {"m": m})


# ------------------------------------------------------------------ norms

def _power_tail(x0, x1, v0, v1, at_left: bool, haar: bool):
    """Integral beyond a grid end of the power law through two end samples."""
    edge = v0 if at_left else v1
    if edge == 0:
        return 0.0
    if v0 <= 0 or v1 <= 0:
        return math.inf
    b = math.log(v1 / v0) / math.log(x1 / x0)
    ex, ev = (x0, v0) if at_left else (x1, v1)
    if haar:  # integrate v(t)/t dt
        b -= 1.0
        ev /= ex
    if at_left:
        return ex * ev / (b + 1.0) if b > -1 else math.inf
    return ex * ev / (-b - 1.0) if b < -1 else math.inf


def _exp_tail(x0, x1, v0, v1, at_left: bool):
    if (v0 if at_left else v1) == 0:
        return 0.0
    if v0 <= 0 or v1 <= 0:
        return math.inf
    rate = math.log(v0 / v1) / (x1 - x0)
    if at_left:
        rate = -rate
    if rate <= 0:
        return math.inf
    return (v0 if at_left else v1) / rate


def tail_estimate(f: GridFunction, p: float) -> tuple[float, float]:
    """Estimated ∫|f|^p beyond the left and right grid ends."""
    x = f.nodes
    a = np.abs(f.values) ** p
    if f.domain == HALF:
        haar = f.measure == HAAR
        left = _power_tail(x[0], x[1], a[0], a[1], True, haar)
        right = _power_tail(x[-2], x[-1], a[-2], a[-1], False, haar)
    elif f.domain == REAL:
        left = _exp_tail(x[0], x[1], a[0], a[1], True)
        right = _exp_tail(x[-2], x[-1], a[-2], a[-1], False)
    else:
        return 0.0, 0.0
    return left, right


def lp_norm(f: GridFunction, p: float, tails: bool = True, max_tail: float = TAIL_SHARE
            ) -> float:
    if not p >= 1:
        raise DomainError("p >= 1")
    if f.dim > 1:
        return _tensor_sum(np.abs(f.values) ** p, f.weights) ** (1.0 / p)
    body = float(np.dot(f.weights, np.abs(f.values) ** p))
    if not tails:
        return body ** (1.0 / p)
    left, right = tail_estimate(f, p)
    extra = left + right
    total = body + extra
    if not math.isfinite(extra) or (total > 0 and extra > max_tail * total):
        raise GridTooCoarse(
            f"estimated L^{p:g} mass beyond the grid is {extra:.3g} of {total:.3g}; widen the grid")
    return total ** (1.0 / p)


def _ratio(num: float, den: float) -> float:
    if den == 0:
        raise ZeroNorm("input has zero norm")
    return num / den


# ------------------------------------------------------------- Hardy family

def _z_minus_log1p(z: np.ndarray) -> np.ndarray:
    """z - log(1+z) without cancellation for small z."""
    z = np.asarray(z, dtype=float)
    # z^2/2 - z^3/3 + ... - z^9/9 by Horner, exact to rounding for |z| < 1e-2
    acc = np.full_like(z, -1.0 / 9)
    for k in range(8, 1, -1):
        acc = (1.0 / k if k % 2 == 0 else -1.0 / k) + z * acc
    series = z * z * acc
    with np.errstate(invalid="ignore"):
        direct = z - np.log1p(z)
    return np.where(np.abs(z) < 1e-2, series, direct)


def _left_mass(x0, x1, v0, v1):
    """∫_0^{x0} f for a power law through the first two samples (elementwise)."""
    v0 = np.asarray(v0, dtype=float)
    v1 = np.asarray(v1, dtype=float)
    power = (v0 > 0) & (v1 > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(power, np.log(np.where(power, v1 / np.where(power, v0, 1.0), 1.0))
                     / math.log(x1 / x0), 0.0)
    if np.any(a <= -1):
        raise DomainError("f is not integrable at 0 (local exponent <= -1)")
    out = np.where(power, x0 * v0 / (1.0 + a), 0.5 * x0 * v0)
    return out if out.ndim else float(out)


def cumulative_integral(f: GridFunction, axis: int = 0, extrapolate: bool = True) -> np.ndarray:
    """∫_0^{x_k} f along ``axis``: trapezoid in x, exact for piecewise-linear f."""
    x = f.nodes
    v = np.moveaxis(f.values, axis, 0)
    dx = np.diff(x).reshape((-1,) + (1,) * (v.ndim - 1))
    cells = 0.5 * dx * (v[1:] + v[:-1])
    out = np.empty_like(v)
    if extrapolate:
        out[0] = _left_mass(x[0], x[1], v[0], v[1])
    else:
        out[0] = 0.5 * x[0] * v[0]
    out[1:] = out[0] + np.cumsum(cells, axis=0)
    return np.moveaxis(out, 0, axis)


def hardy_T(f: GridFunction) -> GridFunction:
    """(Tf)(x) = x^{-1} ∫_0^x f."""
    if f.domain != HALF:
        raise DomainError("hardy_T acts on half-line grids")
    return f.with_values(cumulative_integral(f) / f.nodes)


def hardy_T_star(f: GridFunction) -> GridFunction:
    """(T*f)(x) = ∫_x^∞ f(t) dt / t, exact per cell for piecewise-linear f."""
    if f.domain != HALF:
        raise DomainError("hardy_T_star acts on half-line grids")
    x, v = f.nodes, f.values
    a, b = x[:-1], x[1:]
    slope = (v[1:] - v[:-1]) / (b - a)
    # ∫_a^b (f_a + s(t-a))/t dt = f_a log(b/a) + s a (h/a - log(1 + h/a))
    cells = v[:-1] * np.log(b / a) + slope * a * _z_minus_log1p((b - a) / a)
    tail = 0.0
    if v[-1] != 0:
        if v[-2] > 0 and v[-1] > 0:
            e = math.log(v[-1] / v[-2]) / math.log(x[-1] / x[-2])
            if e >= 0:
                raise DomainError("f must decay at infinity for T*")
            tail = v[-1] / (-e)
    out = np.empty_like(v)
    out[-1] = tail
    out[:-1] = tail + np.cumsum(cells[::-1])[::-1]
    return f.with_values(out)


def _hilbert_cells(x, v, live, chunk):
    a, b = x[:-1][live], x[1:][live]
    fa = v[:-1][live]
    slope = (v[1:][live] - fa) / (b - a)
    out = np.zeros_like(x)
    h = b - a
    for s in range(0, x.size, chunk):
        c = x[s:s + chunk, None] + a
        z = h / c
        # ∫_0^h (f_a + s u)/(c + u) du = f_a log(1 + h/c) + s c (h/c - log(1 + h/c))
        cell = fa * np.log1p(z) + slope * c * _z_minus_log1p(z)
        out[s:s + chunk] = cell.sum(axis=1)
    return out


def _hilbert_cells_log_uniform(v, delta, live):
    """Same cell sums when x_k = e^{kΔ}.

    Then h_j/(x_i + x_j) = (e^Δ − 1)/(e^{(i−j)Δ} + 1) depends on i − j only,
    and the cell sum is a pair of direct (not FFT) discrete convolutions.
    """
    out = np.zeros_like(v)
    idx = np.flatnonzero(live)
    if idx.size == 0:
        return out
    lo, hi = int(idx[0]), int(idx[-1])
    fa = v[lo:hi + 1]
    jump = v[lo + 1:hi + 2] - fa
    k = np.arange(-hi, v.size - lo, dtype=float)
    em1 = math.expm1(delta)
    with np.errstate(over="ignore"):
        z = em1 / (np.exp(k * delta) + 1.0)
    # slope·c = jump/(e^Δ − 1) · (1 + e^{kΔ}) = jump/z
    k2 = np.divide(_z_minus_log1p(z), z, out=np.zeros_like(z), where=z > 0)
    conv = np.convolve(fa, np.log1p(z)) + np.convolve(jump, k2)
    return conv[hi - lo:hi - lo + v.size]


def hilbert_I(f: GridFunction, chunk: int = 2048) -> GridFunction:
    """(If)(x) = ∫_0^∞ f(y)/(x+y) dy with each cell integrated in closed form."""
    if f.domain != HALF:
        raise DomainError("hilbert_I acts on half-line grids")
    x, v = f.nodes, f.values
    live = (v[:-1] != 0) | (v[1:] != 0)
    if f.log_step is not None and f.k0 is not None:
        out = _hilbert_cells_log_uniform(v, f.log_step, live)
    else:
        out = _hilbert_cells(x, v, live, chunk)
    # power-law pieces beyond the grid, integrated against 1/(x+t) in closed form
    x0, x1 = x[0], x[-1]
    if v[0] != 0:
        if v[0] > 0 and v[1] > 0:
            e = math.log(v[1] / v[0]) / math.log(x[1] / x0)
            if e <= -1:
                raise DomainError("f is not integrable at 0 (local exponent <= -1)")
            out += v[0] * (x0 / x) / (e + 1) * hyp2f1(1.0, e + 1, e + 2, -x0 / x)
        else:
            out += 0.5 * x0 * v[0] / (x + 0.5 * x0)
    if v[-1] > 0 and v[-2] > 0:
        e = math.log(v[-1] / v[-2]) / math.log(x1 / x[-2])
        if e >= 0:
            raise DomainError("f must decay at infinity for the Hilbert integral")
        out += v[-1] / (-e) * hyp2f1(1.0, -e, 1 - e, -x / x1)
    return f.with_values(out)


def weighted_S(f: GridFunction, r: float) -> GridFunction:
    """S f = x^{1/r} T f."""
    tf = hardy_T(f)
    return tf.with_values(f.nodes ** (1.0 / r) * tf.values)


def hardy_ratio(f: GridFunction, p: float, q: float, tails: bool = True) -> float:
    """‖x^{1/r} T f‖_q / ‖f‖_p with 1/r = 1/p - 1/q (r = ∞ when p = q)."""
    inv_r = 1.0 / p - 1.0 / q
    tf = hardy_T(f)
    s = tf.with_values(f.nodes ** inv_r * tf.values) if inv_r else tf
    return _ratio(lp_norm(s, q, tails), lp_norm(f, p, tails))


def tensor_hardy(H: GridFunction) -> GridFunction:
    """T applied along every coordinate of a sector function."""
    if H.domain != SECTOR:
        raise DomainError("tensor_hardy acts on sector grids")
    vals = H.values
    x = H.nodes
    for ax in range(vals.ndim):
        g = replace(H, values=vals)
        cum = cumulative_integral(g, axis=ax)
        shape = [1] * vals.ndim
        shape[ax] = -1
        vals = cum / x.reshape(shape)
    return H.with_values(vals)


@dataclass(frozen=True)
class DiagonalTrace:
    psi: GridFunction
    gamma: float
    weighted_exponent: float
    interpolation_error: float


def _diag_interp(values: np.ndarray, logx: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Multilinear interpolation of a cube at (t, ..., t) in log coordinates."""
    m = values.ndim
    idx = np.clip(np.searchsorted(logx, t) - 1, 0, logx.size - 2)
    frac = (t - logx[idx]) / (logx[idx + 1] - logx[idx])
    out = np.zeros_like(t)
    for corner in range(1 << m):
        bits = [(corner >> d) & 1 for d in range(m)]
        wgt = np.ones_like(t)
        ind = []
        for bit in bits:
            wgt = wgt * (frac if bit else 1.0 - frac)
            ind.append(idx + bit)
        out += wgt * values[tuple(ind)]
    return out


def diag_trace_psi(H: GridFunction, gamma: float, at=None, tol: float = 1e-3,
                   p: float | None = None, q: float | None = None) -> DiagonalTrace:
    """ψ(x) = x^γ (T⊗…⊗T H)(x, …, x).

    At grid nodes the diagonal is read exactly.  Off-node points ``at`` are
    interpolated multilinearly in log coordinates, with the error estimated
    by repeating the interpolation on every other node (Richardson); an
    estimate above ``tol`` relative to the peak raises GridTooCoarse.
    The reduced weight exponent -1/p' - 1/q of the one-dimensional form is
    reported alongside γ when p and q are given.
    """
    TH = tensor_hardy(H)
    m = TH.dim
    x = H.nodes
    wexp = math.nan
    if p is not None and q is not None:
        wexp = -(1.0 - 1.0 / p) - 1.0 / q
    if at is None:
        diag = TH.values[(np.arange(x.size),) * m]
        psi = GridFunction(x, x ** gamma * diag, _half_weights(x), HALF, LEBESGUE,
                           H.log_step, H.k0)
        return DiagonalTrace(psi, gamma, wexp, 0.0)
    at = np.asarray(at, dtype=float)
    logx = np.log(x)
    t = np.log(at)
    fine = _diag_interp(TH.values, logx, t)
    coarse_idx = np.arange(0, x.size, 2)
    coarse = _diag_interp(TH.values[np.ix_(*([coarse_idx] * m))], logx[coarse_idx], t)
    err = np.abs(fine - coarse) / 3.0
    peak = max(float(np.max(np.abs(fine))), 1e-300)
    if np.max(err) > tol * peak:
        raise GridTooCoarse(f"diagonal interpolation error {np.max(err) / peak:.2e} > {tol:g}")
    vals = at ** gamma * fine
    psi = GridFunction(at, vals, _half_weights(at), HALF, LEBESGUE)
    return DiagonalTrace(psi, gamma, wexp, float(np.max(err) * np.max(at ** gamma)))


def _half_weights(x: np.ndarray) -> np.ndarray:
    w = np.empty_like(x)
    w[1:-1] = 0.5 * (x[2:] - x[:-2])
    w[0] = 0.5 * (x[1] - x[0])
    w[-1] = 0.5 * (x[-1] - x[-2])
    return w


# ------------------------------------------------- operator-norm probe

def trace_operator_norm(m: int, q: float, lo: float = 1e-7, hi: float = 1e7,
                        cells: int = 1200, iters: int = 400, tol: float = 1e-12) -> float:
    """Power-iteration estimate of sup ‖x^γ (T⊗T H)(x,x)‖_q / ‖H‖_2 for m = 2.

    H is piecewise constant on log cells [x_j, x_{j+1}] × [x_k, x_{k+1}], so
    (T⊗T H)(x_i, x_i) only involves cells with max(j, k) < i and the map
    and its adjoint reduce to prefix sums over the index max(j, k).  For
    q > 2 the nonlinear power method of Boyd is used.
    """
    if m != 2:
        raise DomainError("the probe is implemented for m = 2")
    gamma = m / 2 - 1 / q
    edges = np.exp(np.linspace(math.log(lo), math.log(hi), cells + 1))
    dx = np.diff(edges)
    x = edges[1:]  # evaluation nodes: right ends of the cells
    wq = _half_weights(x)
    J, K = np.meshgrid(np.arange(cells), np.arange(cells), indexing="ij")
    level = np.maximum(J, K)
    area = dx[J] * dx[K]
    scale = x ** (gamma - m)

    def forward(H):
        g = np.bincount(level.ravel(), weights=(H * area).ravel(), minlength=cells)
        return scale * np.cumsum(g)

    def adjoint(psi_pow):
        r = np.cumsum((wq * psi_pow * scale)[::-1])[::-1]
        return r[level]

    H = np.ones((cells, cells)) / math.sqrt(np.sum(area))
    val = 0.0
    for _ in range(iters):
        psi = forward(H)
        nq = float(np.sum(wq * np.abs(psi) ** q)) ** (1 / q)
        new = nq / math.sqrt(float(np.sum(H * H * area)))
        G = adjoint(np.abs(psi) ** (q - 1))
        H = G / math.sqrt(float(np.sum(G * G * area)))
        if abs(new - val) <= tol * new:
            val = new
            break
        val = new
    return val


# ------------------------------------------------- group convolution

def halfline_convolution(g: GridFunction, h: GridFunction) -> GridFunction:
    """(g∗h)(x) = ∫ g(y) h(x/y) dy/y on the multiplicative group.

    Both inputs must carry Haar weights on log grids with the same step;
    in log coordinates this is an ordinary convolution, done by FFT.
    """
    for u in (g, h):
        if u.measure != HAAR or u.log_step is None:
            raise MeasureMismatch("halfline_convolution needs Haar-weighted log grids")
    if not math.isclose(g.log_step, h.log_step, rel_tol=1e-12):
        raise MeasureMismatch("grids must share the log step")
    d = g.log_step
    conv = fftconvolve(g.values * g.weights, h.values)
    k0 = g.k0 + h.k0
    k = np.arange(k0, k0 + conv.size)
    x = np.exp(k * d)
    w = np.full(x.size, d)
    w[0] *= 0.5
    w[-1] *= 0.5
    return GridFunction(x, conv, w, HALF, HAAR, d, int(k0))


def hardy_kernel(grid: GridFunction, p: float) -> GridFunction:
    """g(y) = y^{1/p'} on (0, 1], sampled at 1/2 at the jump y = 1.

    With the jump at an interior node this keeps the trapezoid rule second
    order in the log step.
    """
    x = grid.nodes
    v = np.where(x < 1.0, x ** (1.0 - 1.0 / p), 0.0)
    v[np.isclose(x, 1.0, rtol=1e-12, atol=0)] = 0.5
    return grid.with_values(v)


def group_ratio(h: GridFunction, p: float, q: float) -> float:
    """‖g∗h‖_q / ‖h‖_p in Haar norms with g the Hardy kernel."""
    d = h.log_step
    grid = log_grid(h.nodes[0], math.exp(2 * d), step=d, measure=HAAR)
    g = hardy_kernel(grid, p)
    conv = halfline_convolution(g, h)
    conv = conv.with_values(np.maximum(conv.values, 0.0))
    return _ratio(lp_norm(conv, q, tails=False), lp_norm(h, p, tails=False))


# ------------------------------------------------- exponential density

def exp_density_convolve(f: GridFunction) -> GridFunction:
    """(φ∗f)(x) with φ(x) = e^{-|x|}, exact for piecewise-linear f.

    Forward and backward recursions L_i = e^{-h} L_{i-1} + (cell term) and
    the mirror image; cost is linear in the node count.
    """
    if f.domain != REAL:
        raise DomainError("exp_density_convolve needs a real-line grid")
    x, v = f.nodes, f.values
    hs = np.diff(x)
    if not np.allclose(hs, hs[0], rtol=1e-9, atol=0):
        raise DomainError("exp_density_convolve needs a uniform grid")
    h = float(hs[0])
    em = -math.expm1(-h)                 # 1 - e^{-h}
    e = math.exp(-h)
    near = (h - em) / h                  # (h - 1 + e^{-h}) / h
    far = (em - h * e) / h               # (1 - e^{-h} - h e^{-h}) / h
    fwd = np.concatenate(([0.0], v[:-1] * em + (v[1:] - v[:-1]) * near))
    bwd = np.concatenate((v[:-1] * em + (v[1:] - v[:-1]) * far, [0.0]))
    L = lfilter([1.0], [1.0, -e], fwd)
    R = lfilter([1.0], [1.0, -e], bwd[::-1])[::-1]
    return f.with_values(L + R)


def exp_density_ratio(f: GridFunction, p: float) -> float:
    """‖φ∗f‖_{p'} / ‖f‖_p on a real-line grid."""
    pp = p / (p - 1.0)
    return _ratio(lp_norm(exp_density_convolve(f), pp), lp_norm(f, p))


# ------------------------------------------------- radial profiles

@dataclass(frozen=True)
class RadialProfile:
    """A radial function on R^n stored as a profile in the radius."""
    n: int
    profile: GridFunction
    rearranged: bool = False

    def __post_init__(self):
        if self.profile.domain != HALF:
            raise DomainError("radial profiles live on the half-line")
        if np.any(self.profile.values < 0):
            raise DomainError("radial profiles are nonnegative")
        if self.rearranged and np.any(np.diff(self.profile.values) > 0):
            raise DomainError("profile flagged rearranged must be nonincreasing")

    @classmethod
    def from_function(cls, n: int, fn, lo: float = 1e-8, hi: float = 1e8,
                      nodes: int = 2**14) -> "RadialProfile":
        grid = log_grid(lo, hi, nodes)
        return cls(n, sample(grid, fn))

    def log_value(self, r: np.ndarray) -> np.ndarray:
        """log f(r) by linear interpolation in (log r, log f) with power-law ends."""
        x = np.log(self.profile.nodes)
        with np.errstate(divide="ignore"):
            y = np.log(self.profile.values)
            t = np.log(r)
        out = np.interp(t, x, y)
        lo_s, hi_s = self._end_slopes(x, y)
        with np.errstate(invalid="ignore"):
            out = np.where(t < x[0], y[0] + lo_s * (t - x[0]), out)
            out = np.where(t > x[-1], y[-1] + hi_s * (t - x[-1]), out)
        return out

    def __call__(self, r):
        return np.exp(self.log_value(np.asarray(r, dtype=float)))

    @staticmethod
    def _end_slopes(x, y):
        lo = (y[1] - y[0]) / (x[1] - x[0]) if np.all(np.isfinite(y[:2])) else 0.0
        hi = (y[-1] - y[-2]) / (x[-1] - x[-2]) if np.all(np.isfinite(y[-2:])) else -np.inf
        return lo, hi

    def tail_exponent(self) -> float:
        """κ with f(r) ~ r^{-κ} at the outer end of the grid."""
        x = np.log(self.profile.nodes)
        with np.errstate(divide="ignore"):
            y = np.log(self.profile.values)
        _, hi = self._end_slopes(x, y)
        return float(-hi) if np.isfinite(hi) else math.inf

    def scale(self) -> float:
        """Radius where the profile first falls to half its maximum."""
        v = self.profile.values
        top = float(np.max(v))
        if top <= 0:
            raise ZeroNorm("profile vanishes")
        k = int(np.argmax(v))
        below = np.nonzero(v[k:] <= 0.5 * top)[0]
        return float(self.profile.nodes[k + below[0]]) if below.size else 1.0

    def norm(self, p: float) -> float:
        """‖f‖_{L^p(R^n)} = (|S^{n-1}| ∫ f(r)^p r^{n-1} dr)^{1/p}."""
        area = 2.0 * math.pi ** (0.5 * self.n) / math.gamma(0.5 * self.n)
        g = self.profile.with_values(self.profile.values * self.profile.nodes ** ((self.n - 1) / p))
        return area ** (1.0 / p) * lp_norm(g, p)


def ball_volume(n: int) -> float:
    return math.pi ** (0.5 * n) / math.gamma(0.5 * n + 1.0)


def averaging_W(f: RadialProfile) -> RadialProfile:
    """W(x) = vol(B)^{-1} x^{-n} ∫_{|t|<x} f(t) dt.

    With v = |t|^n this is T applied to g(v) = f(v^{1/n}) at v = x^n.
    """
    n = f.n
    prof = f.profile
    v_nodes = prof.nodes ** n
    g = GridFunction(v_nodes, prof.values, _half_weights(v_nodes), HALF, LEBESGUE)
    tg = hardy_T(g)
    return RadialProfile(n, prof.with_values(tg.values))


def averaging_ratio(f: RadialProfile, p: float, q: float) -> float:
    """‖|x|^γ W‖_{L^q(R^n)} / ‖f‖_{L^p(R^n)} with γ = n/p - n/q."""
    W = averaging_W(f)
    gamma = f.n / p - f.n / q
    xw = RadialProfile(f.n, W.profile.with_values(W.profile.nodes ** gamma * W.profile.values))
    return _ratio(xw.norm(q), f.norm(p))


def k_kernel_mass_exact(m: int) -> Fraction:
    """∫_1^∞ t^{-m/2} dt/t in closed form: the antiderivative −(2/m) t^{-m/2} at 1."""
    if m < 1:
        raise DomainError("m must be positive")
    return 1 / Fraction(m, 2)


def k_kernel_mass(m: int, tol: float = 1e-13) -> float:
    """∫_1^∞ t^{-m/2} dt/t by quadrature (closed form 2/m)."""
    from .numerics import integrate_1d
    return integrate_1d(lambda t: t ** (-0.5 * m - 1.0), 1.0, math.inf, tol=tol).value
