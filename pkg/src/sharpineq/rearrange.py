"""Equimeasurable rearrangements of grid functions and monotonicity checks.

Every grid node is read as a cell of measure ``weights[i]`` centred at the
node, and rearrangements move (value, measure) pairs rather than raw
samples.  Values that tie exactly form one level set; a level set is split
in half only when it has to sit symmetrically about a centre, so a function
that is already symmetric-decreasing comes back on its own grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DivergentInstance, DomainError, MeasureMismatch, NegativeInput
from .operators import HAAR, HALF, LEBESGUE, REAL, SECTOR, GridFunction

LATTICE_TOL = 1e-9


@dataclass(frozen=True)
class RearrangementReport:
    before: float
    after: float
    monotone: bool
    tolerance: float

    def to_dict(self) -> dict:
        return {"before": self.before, "after": self.after, "monotone": self.monotone,
                "tolerance": self.tolerance}


def _check_nonnegative(f: GridFunction):
    if np.any(f.values < 0):
        raise NegativeInput("rearrangement needs a nonnegative function")


def _levels(values: np.ndarray, measures: np.ndarray):
    """Distinct values in decreasing order, with the total measure and cell count of each."""
    order = np.argsort(-values, kind="stable")
    v = values[order]
    w = measures[order]
    starts = np.flatnonzero(np.concatenate(([True], v[1:] != v[:-1])))
    counts = np.diff(np.concatenate((starts, [v.size])))
    return v[starts], np.add.reduceat(w, starts), counts


def _symmetric_layout(values, measures):
    """Nodes, weights and values of the symmetric-decreasing step function.

    Levels are placed as mirrored halves around 0; the top level stays a
    single centre cell when it holds an odd number of cells, so grids
    centred on a node and grids centred between nodes both round-trip.
    """
    lv, lw, counts = _levels(values, measures)
    edge = np.cumsum(lw) / 2.0
    inner = np.concatenate(([0.0], edge[:-1]))
    mid = 0.5 * (inner + edge)
    half = lw / 2.0
    if counts[0] % 2 == 1:
        nodes = np.concatenate((-mid[:0:-1], [0.0], mid[1:]))
        weights = np.concatenate((half[:0:-1], [lw[0]], half[1:]))
        vals = np.concatenate((lv[:0:-1], [lv[0]], lv[1:]))
    else:
        nodes = np.concatenate((-mid[::-1], mid))
        weights = np.concatenate((half[::-1], half))
        vals = np.concatenate((lv[::-1], lv))
    return nodes, weights, vals


def decreasing_rearrangement(f: GridFunction) -> GridFunction:
    """f* on the real line (symmetric about 0) or the half-line (decreasing from 0)."""
    _check_nonnegative(f)
    if f.domain == REAL:
        nodes, weights, vals = _symmetric_layout(f.values, f.weights)
        return GridFunction(nodes, vals, weights, REAL, LEBESGUE)
    if f.domain == HALF:
        if f.measure != LEBESGUE:
            raise MeasureMismatch("use inversion_symmetrize for Haar-measure functions")
        lv, lw, _ = _levels(f.values, f.weights)
        edge = np.cumsum(lw)
        nodes = edge - 0.5 * lw
        return GridFunction(nodes, lv, lw, HALF, LEBESGUE)
    raise DomainError("use sector_rearrangement for sector grids")


def inversion_symmetrize(h: GridFunction) -> GridFunction:
    """Rearrange h so that g(1/y) = g(y) with g nonincreasing for y > 1.

    This is the symmetric-decreasing rearrangement in t = log y, so the
    Haar measure dy/y is preserved.
    """
    if h.domain != HALF or h.measure != HAAR:
        raise MeasureMismatch("inversion symmetrization needs a Haar-measure half-line grid")
    _check_nonnegative(h)
    t, weights, vals = _symmetric_layout(h.values, h.weights)
    return GridFunction(np.exp(t), vals, weights, HALF, HAAR)


def sector_rearrangement(f: GridFunction) -> GridFunction:
    """f_# on the first orthant, radial and nonincreasing in |x|.

    Reflecting f into all 2^m orthants multiplies every level set by 2^m and
    radial rearrangement there yields balls; restricting back gives
    quarter-balls of the original measure.  On the grid this means
    walking the cells in order of the radius of their centres (ties by
    index) and handing out the sorted levels by cumulative measure; with
    equal cell measures it is an exact permutation of the values.
    """
    if f.domain != SECTOR:
        raise DomainError("sector_rearrangement acts on sector grids")
    _check_nonnegative(f)
    m = f.dim
    if m > 3:
        raise DomainError("sector rearrangement is implemented for m <= 3")
    mesh = np.meshgrid(*([f.nodes] * m), indexing="ij")
    radius = np.sqrt(sum(c * c for c in mesh)).ravel()
    cell = np.ones(1)
    for _ in range(m):
        cell = np.multiply.outer(cell, f.weights)
    cell = cell.reshape(-1)
    vals = f.values.ravel()

    order = np.lexsort((np.arange(radius.size), radius))
    target = np.cumsum(cell[order]) - 0.5 * cell[order]
    by_value = np.argsort(-vals, kind="stable")
    edges = np.cumsum(cell[by_value])
    pick = np.minimum(np.searchsorted(edges, target, side="right"), edges.size - 1)
    out = np.empty_like(vals)
    out[order] = vals[by_value][pick]
    return f.with_values(out.reshape(f.values.shape))


def sector_pairing(f: GridFunction, g: GridFunction) -> float:
    """∫_{Λ_m} f g with the product-grid weights."""
    if f.values.shape != g.values.shape:
        raise DomainError("sector functions must share the grid")
    w = np.ones(1)
    for _ in range(f.dim):
        w = np.multiply.outer(w, f.weights)
    w = w.reshape(f.values.shape)
    return float(np.sum(w * f.values * g.values))


def sector_check(f: GridFunction, g: GridFunction, tol: float = 1e-10) -> RearrangementReport:
    before = sector_pairing(f, g)
    after = sector_pairing(sector_rearrangement(f), sector_rearrangement(g))
    return RearrangementReport(before, after, after >= before - tol * max(1.0, abs(before)), tol)


# --------------------------------------------------------- step functions

def cell_edges(f: GridFunction) -> tuple[np.ndarray, np.ndarray]:
    """Left and right ends of the cells; they must tile an interval."""
    lo = f.nodes - 0.5 * f.weights
    hi = f.nodes + 0.5 * f.weights
    if np.any(np.abs(lo[1:] - hi[:-1]) > LATTICE_TOL * max(1.0, float(np.max(np.abs(hi))))):
        raise DomainError("cells do not tile an interval (use a cell-centred grid)")
    return lo, hi


def step_value(f: GridFunction, x) -> np.ndarray:
    """Evaluate f as a step function, zero outside its cells."""
    lo, hi = cell_edges(f)
    x = np.asarray(x, dtype=float)
    k = np.searchsorted(lo, x, side="right") - 1
    inside = (k >= 0) & (x < hi[np.clip(k, 0, None)])
    return np.where(inside, f.values[np.clip(k, 0, f.values.size - 1)], 0.0)


def distribution(f: GridFunction, level: float) -> float:
    """|{f > level}| in the grid measure."""
    return float(np.sum(f.weights[f.values > level]))


def _on_lattice(f: GridFunction, delta: float) -> tuple[int, np.ndarray]:
    """f as values on cells [kδ, (k+1)δ]; returns the first index and the values."""
    lo, hi = cell_edges(f)
    a = lo / delta
    b = hi / delta
    ia = np.rint(a)
    ib = np.rint(b)
    if np.max(np.abs(a - ia)) > LATTICE_TOL or np.max(np.abs(b - ib)) > LATTICE_TOL:
        raise DomainError("cell boundaries are not on a common lattice")
    ia = ia.astype(np.int64)
    ib = ib.astype(np.int64)
    k0 = int(ia[0])
    out = np.repeat(f.values, ib - ia)
    return k0, out


def _common_step(funcs) -> float:
    return min(float(np.min(f.weights)) for f in funcs) / 2.0


def riesz_sobolev_functional(f: GridFunction, g: GridFunction, h: GridFunction,
                             delta: float | None = None) -> float:
    """∬ f(x) g(x−y) h(y) dx dy for step functions on a common lattice.

    For x and y in lattice cells a and b, x − y is triangular on
    [(a−b−1)δ, (a−b+1)δ], half in g's cell a−b−1 and half in cell a−b, so
    the double integral is δ² Σ f_a h_b (g_{a−b−1} + g_{a−b})/2 exactly.
    """
    if delta is None:
        delta = _common_step((f, g, h))
    fa, fv = _on_lattice(f, delta)
    ga, gv = _on_lattice(g, delta)
    ha, hv = _on_lattice(h, delta)
    # ĝ_k = (g_{k−1} + g_k)/2 starting at index ga
    gh = 0.5 * (np.concatenate((gv, [0.0])) + np.concatenate(([0.0], gv)))
    # (ĝ ∗ h reversed)_a = Σ_b h_b ĝ_{a−b}: index a = ga + hb
    conv = np.convolve(gh, hv)
    start = ga + ha
    lo = max(fa, start)
    hi = min(fa + fv.size, start + conv.size)
    if hi <= lo:
        return 0.0
    return float(delta * delta * np.dot(fv[lo - fa:hi - fa], conv[lo - start:hi - start]))


def riesz_sobolev_check(f: GridFunction, g: GridFunction, h: GridFunction,
                        tol: float = 1e-10) -> RearrangementReport:
    for u in (f, g, h):
        if u.domain != REAL:
            raise DomainError("Riesz–Sobolev check acts on real-line grids")
    fs, gs, hs = (decreasing_rearrangement(u) for u in (f, g, h))
    delta = _common_step((f, g, h, fs, gs, hs))
    before = riesz_sobolev_functional(f, g, h, delta)
    after = riesz_sobolev_functional(fs, gs, hs, delta)
    return RearrangementReport(before, after, after >= before - tol * max(1.0, abs(before)), tol)


# --------------------------------------------------------- Brascamp–Lieb–Luttinger

_PAIR_PATTERN = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, -1.0]])


def _riemann_integral(funcs, a: np.ndarray, points: int) -> float:
    M, m = a.shape
    reach = max(float(np.max(np.abs(cell_edges(f)[1]))) for f in funcs)
    reach = max(reach, max(float(np.max(np.abs(cell_edges(f)[0]))) for f in funcs))
    smallest = min(float(np.min(np.abs(row[row != 0]))) for row in a)
    box = reach / smallest
    h = 2 * box / points
    axis = -box + h * (np.arange(points) + 0.5)
    mesh = np.meshgrid(*([axis] * m), indexing="ij")
    prod = np.ones(mesh[0].shape)
    for f, row in zip(funcs, a):
        arg = sum(c * x for c, x in zip(row, mesh))
        prod *= step_value(f, arg)
    return float(prod.sum() * h ** m)


def _line_integral(funcs, coeffs) -> float:
    """∫_R ∏ f_k(c_k x) dx exactly: the product is constant between breakpoints."""
    pieces = []
    for f, c in zip(funcs, coeffs):
        lo, hi = cell_edges(f)
        pieces.append(np.concatenate((lo, hi[-1:])) / c)
    cuts = np.unique(np.concatenate(pieces))
    mids = 0.5 * (cuts[1:] + cuts[:-1])
    prod = np.ones_like(mids)
    for f, c in zip(funcs, coeffs):
        prod *= step_value(f, c * mids)
    return float(np.dot(prod, np.diff(cuts)))


def _separable(a: np.ndarray) -> bool:
    return bool(np.all(np.count_nonzero(a, axis=1) == 1))


def _multilinear(funcs, a: np.ndarray, points: int, delta: float) -> float:
    if _separable(a):
        total = 1.0
        for j in range(a.shape[1]):
            rows = np.flatnonzero(a[:, j])
            total *= _line_integral([funcs[k] for k in rows], a[rows, j])
        return total
    if a.shape == (3, 2) and np.array_equal(a, _PAIR_PATTERN):
        # ∬ f1(x1) f2(x2) g(x1 − x2) is the Riesz–Sobolev form with the lattice formula
        return riesz_sobolev_functional(funcs[0], funcs[2], funcs[1], delta)
    return _riemann_integral(funcs, a, points)


def bll_check(f_list, a_matrix, tol: float | None = None, points: int = 400
              ) -> RearrangementReport:
    """Compare ∫_{R^m} ∏_k f_k(Σ_j a_kj x_j) dx before and after rearranging every f_k.

    Forms where every f_k sees a single variable, and the pairwise pattern
    f1(x1) f2(x2) g(x1 − x2), are evaluated exactly; anything else uses a
    midpoint sum with ``points`` nodes per axis, so the default tolerance
    there is discretization sized.
    """
    a = np.atleast_2d(np.asarray(a_matrix, dtype=float))
    funcs = list(f_list)
    if a.shape[0] != len(funcs):
        raise DomainError("one row of a_matrix per function")
    m = a.shape[1]
    if m > 2:
        raise DomainError("bll_check handles at most two integration variables")
    if np.linalg.matrix_rank(a) < m:
        raise DivergentInstance("the linear forms leave a direction free; the integral diverges")
    for f in funcs:
        if f.domain != REAL:
            raise DomainError("bll_check acts on real-line grids")
        _check_nonnegative(f)
        cell_edges(f)
    stars = [decreasing_rearrangement(f) for f in funcs]
    exact = _separable(a) or (a.shape == (3, 2) and np.array_equal(a, _PAIR_PATTERN))
    if tol is None:
        tol = 1e-10 if exact else 2e-2
    delta = _common_step(funcs + stars)
    before = _multilinear(funcs, a, points, delta)
    after = _multilinear(stars, a, points, delta)
    return RearrangementReport(before, after, after >= before - tol * max(abs(before), 1e-300),
                               tol)


def is_symmetric_decreasing(f: GridFunction, tol: float = 0.0) -> bool:
    """Values nonincreasing in |x| and symmetric about 0 (or 1 in log scale for Haar)."""
    x = np.log(f.nodes) if f.measure == HAAR else f.nodes
    order = np.argsort(np.abs(x), kind="stable")
    v = f.values[order]
    if np.any(np.diff(v) > tol):
        return False
    return bool(np.allclose(x, -x[::-1], rtol=0, atol=1e-12 * max(1.0, float(np.max(np.abs(x)))))
                and np.allclose(f.values, f.values[::-1], rtol=0, atol=tol))

