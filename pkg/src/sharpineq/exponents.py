"""Exponent bookkeeping for every inequality family.

Each family fixes which exponents are free, which are derived, and which
identities and open ranges must hold.  ``derive`` fills in the derived
fields and refuses inconsistent input; ``validate`` only reports.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from enum import Enum

from .errors import ConstraintViolation, RangeViolation

MARGIN = 1e-9
RTOL = 1e-12


class Family(str, Enum):
    YoungL2 = "YoungL2"
    MYoungRestricted = "MYoungRestricted"
    MYoung = "MYoung"
    MHLS_Riesz = "MHLS_Riesz"
    HardyWeighted = "HardyWeighted"
    TraceL2 = "TraceL2"
    DiagYoung = "DiagYoung"
    DiagMHLS = "DiagMHLS"
    SteinWeiss = "SteinWeiss"
    ExpDensity = "ExpDensity"
    TraceFractional = "TraceFractional"


S_FAMILIES = {Family.YoungL2, Family.MYoungRestricted, Family.MYoung, Family.MHLS_Riesz}


def dual(x: float) -> float:
    """Hölder conjugate, with 1 and infinity swapped."""
    if x == 1:
        return math.inf
    if math.isinf(x):
        return 1.0
    return x / (x - 1.0)


@dataclass(frozen=True)
class Residual:
    name: str
    kind: str  # "range" or "constraint"
    value: float

    def __str__(self):
        return f"{self.kind}:{self.name} (residual {self.value:.3e})"


@dataclass(frozen=True)
class ExponentTuple:
    family: Family
    p: float
    q: float
    m: int
    n: int
    s: tuple = ()
    beta: float = 0.0
    p_prime: float = math.nan
    q_prime: float = math.nan
    s_prime: tuple = ()
    r: float = math.nan
    gamma: float | None = None
    alpha: float | None = None
    lambda_: tuple = ()
    residuals: tuple = field(default=(), compare=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["family"] = self.family.value
        d["s"] = list(self.s)
        d["s_prime"] = list(self.s_prime)
        d["lambda"] = list(d.pop("lambda_"))
        d["residuals"] = [str(x) for x in self.residuals]
        return {k: _jsonable(v) for k, v in d.items()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ExponentTuple":
        return derive(d["family"], p=_unjson(d.get("p")), q=_unjson(d.get("q")),
                      m=d["m"], n=d["n"], s=d.get("s") or (), beta=d.get("beta", 0.0))

    def dualized(self) -> tuple[float, float]:
        return dual(self.p), dual(self.q)


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if isinstance(v, list):
        return [_jsonable(x) for x in v]
    return v


def _unjson(v):
    if isinstance(v, str):
        return float(v)
    return v


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(1.0, abs(a), abs(b))


class _Checker:
    def __init__(self, margin: float, rtol: float):
        self.margin = margin
        self.rtol = rtol
        self.out: list[Residual] = []

    def gt(self, name, x, lo):
        if not x > lo + self.margin * max(1.0, abs(lo)):
            self.out.append(Residual(name, "range", lo - x))

    def lt(self, name, x, hi):
        if math.isinf(hi) and hi > 0:
            if not math.isfinite(x):
                self.out.append(Residual(name, "range", math.inf))
            return
        if not x < hi - self.margin * max(1.0, abs(hi)):
            self.out.append(Residual(name, "range", x - hi))

    def ge(self, name, x, lo):
        if x < lo - self.rtol * max(1.0, abs(lo)):
            self.out.append(Residual(name, "range", lo - x))

    def le(self, name, x, hi):
        if x > hi + self.rtol * max(1.0, abs(hi)):
            self.out.append(Residual(name, "range", x - hi))

    def eq(self, name, a, b):
        res = _rel(a, b)
        if not res <= self.rtol:
            self.out.append(Residual(name, "constraint", res))


def _check(t: ExponentTuple, margin: float, rtol: float) -> list[Residual]:
    c = _Checker(margin, rtol)
    f = t.family
    if t.m < 1:
        c.out.append(Residual("m >= 1", "range", 1 - t.m))
    if t.n < 1:
        c.out.append(Residual("n >= 1", "range", 1 - t.n))
    if f in S_FAMILIES and len(t.s) != t.m:
        c.out.append(Residual("len(s) == m", "constraint", abs(len(t.s) - t.m)))
        return c.out

    if f is Family.YoungL2:
        c.eq("p == 2", t.p, 2.0)
        c.ge("q >= 2", t.q, 2.0)
        c.lt("q < inf", t.q, math.inf)
        for k, sk in enumerate(t.s):
            c.gt(f"s[{k}] > 1", sk, 1.0)
            c.lt(f"s[{k}] < 2", sk, 2.0)
        c.eq("m/2 + 1/q == sum 1/s", t.m / 2 + 1 / t.q, sum(1 / x for x in t.s))
    elif f in (Family.MYoungRestricted, Family.MYoung, Family.MHLS_Riesz):
        c.gt("p > 1", t.p, 1.0)
        c.lt("p < q", t.p, t.q)
        c.lt("q < inf", t.q, math.inf)
        cap = t.p_prime / t.q_prime if f is Family.MYoungRestricted else t.p_prime
        label = "p'/q'" if f is Family.MYoungRestricted else "p'"
        for k, sk in enumerate(t.s):
            c.gt(f"s[{k}] > 1", sk, 1.0)
            c.lt(f"s[{k}] < {label}", sk, cap)
        if f is Family.MYoungRestricted:
            c.lt("m < p'/q'", t.m, cap)
        c.eq("1/q + m/p' == sum 1/s", 1 / t.q + t.m / t.p_prime, sum(1 / x for x in t.s))
    elif f is Family.HardyWeighted:
        c.gt("p > 1", t.p, 1.0)
        if not math.isfinite(t.r) or t.r <= 0:
            c.out.append(Residual("1/r finite (p < q strict)", "range", t.p - t.q))
        else:
            c.lt("p < q", t.p, t.q)
        c.lt("q < inf", t.q, math.inf)
    elif f is Family.TraceL2:
        c.eq("p == 2", t.p, 2.0)
        c.ge("q >= 2", t.q, 2.0)
        c.lt("q < inf", t.q, math.inf)
    elif f is Family.DiagYoung:
        c.ge("m >= 2", t.m, 2)
        c.gt("p > 1", t.p, 1.0)
        c.le("p <= m", t.p, t.m)
        c.eq("1/p' == (m-1)/(2q)", 1 / t.p_prime, (t.m - 1) / (2 * t.q))
    elif f is Family.DiagMHLS:
        c.ge("m >= 2", t.m, 2)
        c.gt("p > 1", t.p, 1.0)
        c.lt("p < m strict", t.p, t.m)
        c.eq("2n/p' == (m-1) gamma", 2 * t.n / t.p_prime, (t.m - 1) * t.gamma)
        c.eq("gamma == n/q", t.gamma, t.n / t.q)
    elif f is Family.SteinWeiss:
        c.ge("m >= 2", t.m, 2)
        c.gt("p > 1", t.p, 1.0)
        c.le("p <= m", t.p, t.m)
        c.gt("beta > 0", t.beta, 0.0)
        c.gt("gamma > 0", t.gamma, 0.0)
        c.eq("2n/p' == 2 beta + (m-1) gamma", 2 * t.n / t.p_prime,
             2 * t.beta + (t.m - 1) * t.gamma)
    elif f is Family.ExpDensity:
        c.gt("p > 1", t.p, 1.0)
        c.lt("p < 2", t.p, 2.0)
        c.eq("q == p'", t.q, t.p_prime)
    elif f is Family.TraceFractional:
        c.gt("p > 1", t.p, 1.0)
        c.ge("q >= p", t.q, t.p)
        c.lt("q < inf", t.q, math.inf)
        c.gt("alpha > 0", t.alpha, 0.0)
        c.eq("alpha/n == m/p - 1/q", t.alpha / t.n, t.m / t.p - 1 / t.q)
    return c.out


def assemble(family, p=None, q=None, m=1, n=1, s=(), beta=0.0) -> ExponentTuple:
    """Fill the derived fields without checking anything.

    Exponents a family determines are always computed here; ``derive``
    compares any value the caller supplied for them against the result.
    """
    fam = Family(family)
    s = tuple(float(x) for x in (s or ()))
    m = int(m)
    n = int(n)
    beta = float(beta or 0.0)
    gamma = alpha = None
    lam: tuple = ()

    if fam in (Family.YoungL2, Family.TraceL2):
        p = 2.0 if p is None else float(p)
    if fam is Family.TraceFractional and p is None:
        p = 2.0
    if p is None:
        raise ConstraintViolation(f"{fam.value} needs p")
    p = float(p)
    pp = dual(p)

    if fam in (Family.DiagYoung, Family.DiagMHLS):
        q = (m - 1) * pp / 2.0
    elif fam is Family.SteinWeiss:
        gamma = (2 * n / pp - 2 * beta) / (m - 1) if m > 1 else math.nan
        q = n / gamma if gamma and gamma > 0 else math.inf
    elif fam is Family.ExpDensity:
        q = pp
    if q is None:
        raise ConstraintViolation(f"{fam.value} needs q")
    q = float(q)
    qp = dual(q)
    sp = tuple(dual(x) for x in s)
    inv_r = 1 / p - 1 / q
    r = 1 / inv_r if inv_r != 0 else math.inf

    if fam is Family.YoungL2:
        lam = (1 - 2 / q,) + tuple(1 - 2 / x for x in sp)
    elif fam is Family.MHLS_Riesz:
        lam = (None,) + tuple(n / x for x in s)
    elif fam is Family.TraceL2:
        gamma = m / 2 - 1 / q
        alpha = m / 2 + 1 / q
    elif fam is Family.DiagMHLS:
        gamma = 2 * n / (pp * (m - 1))
    elif fam is Family.TraceFractional:
        alpha = n * (m / p - 1 / q)
    elif fam is Family.HardyWeighted:
        gamma = 1 / r if math.isfinite(r) else 0.0

    return ExponentTuple(fam, p, q, m, n, s, beta, pp, qp, sp, r, gamma, alpha, lam)


def validate(t: ExponentTuple, margin: float = MARGIN, rtol: float = RTOL) -> list[Residual]:
    """Residuals of every family invariant; empty means the tuple is admissible."""
    return _check(t, margin, rtol)


def derive(family, p=None, q=None, m=1, n=1, s=(), beta=0.0,
           margin: float = MARGIN, rtol: float = RTOL) -> ExponentTuple:
    t = assemble(family, p=p, q=q, m=m, n=n, s=s, beta=beta)
    res = validate(t, margin, rtol)
    fam = t.family
    if q is not None and fam in (Family.DiagYoung, Family.DiagMHLS, Family.SteinWeiss,
                                 Family.ExpDensity):
        gap = _rel(float(q), t.q)
        if gap > rtol:
            res.append(Residual(f"supplied q == derived q ({t.q:.12g})", "constraint", gap))
    ranges = [x for x in res if x.kind == "range"]
    if ranges:
        raise RangeViolation("; ".join(map(str, ranges)), res)
    if res:
        raise ConstraintViolation("; ".join(map(str, res)), res)
    return t
