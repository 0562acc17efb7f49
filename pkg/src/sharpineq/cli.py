"""Command-line entry point: constants | verify | sharpness | mc.

Exit codes: 0 ok, 1 bound violation, 2 invalid exponents, 3 no convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field

from . import __version__
from . import constants as K
from .errors import ConstraintViolation, NonConvergence, RangeViolation, SharpIneqError
from .exponents import Family, derive
from .functionals import ExtremalFamily, Verdict, sharpness_search
from .montecarlo import (estimate_B_integral, estimate_sphere_product_integral,
                         riesz_composition_constant)
from .suites import SUITES, run_suites, sphere_pair_reference

DEFAULTS = {"grid": 2**14, "tol": 1e-6, "samples": 10**6, "seed": 42}

EXIT_OK, EXIT_VIOLATION, EXIT_CONSTRAINT, EXIT_NONCONVERGENCE = 0, 1, 2, 3


@dataclass
class RunConfig:
    subcommand: str
    id: str | None = None
    p: float | None = None
    q: float | None = None
    m: int | None = None
    n: int | None = None
    s: list = field(default_factory=list)
    beta: float | None = None
    gamma: float | None = None
    alpha: float | None = None
    grid: int = DEFAULTS["grid"]
    tol: float = DEFAULTS["tol"]
    samples: int = DEFAULTS["samples"]
    seed: int = DEFAULTS["seed"]
    format: str = "json"
    out: str | None = None
    suite: str | None = None
    quick: bool = False
    all: bool = False
    integral: str | None = None
    budget: int = 400

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        return cls(**d)


def _count(text: str) -> int:
    """Accept 1000000, 1e6 or 10**6."""
    if "**" in text:
        base, exp = text.split("**")
        return int(base) ** int(exp)
    v = float(text)
    if v != int(v) or v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return int(v)


def _floats(text: str) -> list:
    return [float(x) for x in text.replace(",", " ").split()]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sharpineq", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--p", type=float)
        p.add_argument("--q", type=float)
        p.add_argument("--m", type=int)
        p.add_argument("--n", type=int)
        p.add_argument("--s", type=_floats, default=[], help="exponents s_k, comma separated")
        p.add_argument("--beta", type=float)
        p.add_argument("--gamma", type=float)
        p.add_argument("--alpha", type=float)
        p.add_argument("--grid", type=_count, default=DEFAULTS["grid"])
        p.add_argument("--tol", type=float, default=DEFAULTS["tol"])
        p.add_argument("--samples", type=_count, default=DEFAULTS["samples"])
        p.add_argument("--seed", type=int, default=DEFAULTS["seed"])
        fmt = p.add_mutually_exclusive_group()
        fmt.add_argument("--json", dest="format", action="store_const", const="json")
        fmt.add_argument("--csv", dest="format", action="store_const", const="csv")
        p.set_defaults(format="json")
        p.add_argument("--out", metavar="PATH")

    p = sub.add_parser("constants", help="print catalog constants")
    p.add_argument("--id", "--theorem", dest="id", choices=[t.value for t in K.TheoremId])
    p.add_argument("--all", action="store_true")
    common(p)
    p = sub.add_parser("verify", help="run verification suites")
    p.add_argument("--suite", default="all", choices=["all", *SUITES])
    p.add_argument("--quick", action="store_true")
    common(p)
    p = sub.add_parser("sharpness", help="maximize a ratio over an extremal family")
    p.add_argument("--theorem", "--id", dest="id", required=True, choices=sorted(SEARCHES))
    p.add_argument("--budget", type=int, default=400)
    common(p)
    p = sub.add_parser("mc", help="raw Monte Carlo estimates")
    p.add_argument("--integral", required=True, choices=["sphere", "B"])
    common(p)
    return ap


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    fields = RunConfig.__dataclass_fields__
    return RunConfig(**{k: v for k, v in vars(ns).items() if k in fields})


# ------------------------------------------------------------ commands

def _opt(v, default):
    return default if v is None else v


def constant_for(tid: K.TheoremId, c: RunConfig):
    """Evaluate one catalog entry from command-line parameters."""
    T = K.TheoremId
    p, q, m, n = c.p, c.q, c.m, c.n
    if K.CATALOG[tid] is None:
        return {"id": tid.value, "value": None, "method": None,
                "note": "no closed-form sharp constant; see empirical estimates"}
    if tid is T.hardy:
        r = K.hardy_constant(_opt(p, 2.0))
    elif tid in (T.bliss, T.group_convolution):
        r = K.bliss_constant(_opt(p, 2.0), _opt(q, 4.0))
    elif tid is T.tensor_hardy:
        r = K.tensor_hardy_constant(_opt(p, 2.0), q, _opt(m, 2))
    elif tid is T.averaging:
        r = K.averaging_constant(_opt(n, 3), _opt(p, 2.0), _opt(q, 4.0))
    elif tid is T.young_l2:
        r = K.young_l2_constant(dict(q=_opt(q, 2.0), m=_opt(m, 2), n=_opt(n, 1),
                                     s=tuple(c.s or (4 / 3, 4 / 3))))
    elif tid is T.multilinear_young_restricted:
        tup = dict(p=_opt(p, 1.25), q=_opt(q, 2.0), m=_opt(m, 2), n=_opt(n, 1),
                   s=tuple(c.s or (1 / 0.45, 1 / 0.45)))
        r = K.CATALOG[tid](tup)
    elif tid in (T.multilinear_young, T.multilinear_young_extension):
        tup = dict(p=_opt(p, 1.5), q=_opt(q, 3.0), m=_opt(m, 2), n=_opt(n, 1),
                   s=tuple(c.s or (2.0, 2.0)))
        r = K.CATALOG[tid](tup)
    elif tid is T.exp_density:
        r = K.exp_density_constant(_opt(p, 1.5))
    elif tid is T.trace_l2:
        r = K.trace_l2_constant(_opt(m, 2), _opt(q, 2.0))
    elif tid is T.hilbert:
        r = K.hilbert_constant(_opt(p, 2.0))
    elif tid is T.hilbert_trace:
        r = K.hilbert_trace_constant(_opt(m, 2))
    elif tid is T.trace_fractional:
        r = K.trace_fractional_constant(dict(p=_opt(p, 2.0), q=_opt(q, 4.0), m=_opt(m, 2),
                                             n=_opt(n, 1)), c.samples, c.seed)
    elif tid is T.diag_young:
        r = K.diag_young_constant(dict(p=_opt(p, 2.0), m=_opt(m, 2), n=_opt(n, 1)))
    elif tid is T.diag_mhls:
        r = K.diag_mhls_constant(dict(p=_opt(p, 2.0), m=_opt(m, 3), n=_opt(n, 1)),
                                 c.samples, c.seed)
    else:  # pragma: no cover - every catalog key is handled above
        raise KeyError(tid)
    return r.to_dict() | {"id": tid.value}


def cmd_constants(c: RunConfig) -> tuple[list, int]:
    if c.all or not c.id:
        return [constant_for(t, c) for t in K.TheoremId], EXIT_OK
    return [constant_for(K.TheoremId(c.id), c)], EXIT_OK


def cmd_verify(c: RunConfig) -> tuple[list, int]:
    reports = run_suites(c.suite or "all", c.seed, c.quick,
                         samples=None if c.samples == DEFAULTS["samples"] else c.samples,
                         grid=None if c.grid == DEFAULTS["grid"] else c.grid)
    rows = [r.to_dict() for r in reports]
    bad = any(r.verdict is Verdict.Fail for r in reports)
    return rows, EXIT_VIOLATION if bad else EXIT_OK


def _family_for(theorem: str, c: RunConfig):
    if theorem == "bliss":
        p, q = _opt(c.p, 2.0), _opt(c.q, 4.0)
        return ExtremalFamily.bliss(p, q, c=3.0, shape=1.2 * q / (q - p)), None
    if theorem == "exp-density":
        return ExtremalFamily.cosh_power(_opt(c.p, 1.5)), None
    if theorem == "hardy":
        return ExtremalFamily.power_cutoff(_opt(c.p, 2.0), 0.25), None
    if theorem == "young-l2":
        m = _opt(c.m, 2)
        tup = derive(Family.YoungL2, q=_opt(c.q, 2.0), m=m, n=_opt(c.n, 1),
                     s=tuple(c.s or (4 / 3,) * m))
        return ExtremalFamily.gaussian([1.0] * (m + 1), tup.n), tup
    if theorem == "diag-young":
        tup = derive(Family.DiagYoung, p=_opt(c.p, 1.5), m=_opt(c.m, 2), n=_opt(c.n, 1))
        return ExtremalFamily.gaussian([1.0], tup.n), tup
    if theorem == "diag-mhls":
        tup = derive(Family.DiagMHLS, p=_opt(c.p, 2.0), m=_opt(c.m, 3), n=_opt(c.n, 1))
        return ExtremalFamily.conformal(tup.n, tup.p, power=1.2 * tup.n / tup.p), tup
    raise KeyError(theorem)


SEARCHES = {"bliss", "exp-density", "hardy", "young-l2", "diag-young", "diag-mhls"}


def cmd_sharpness(c: RunConfig) -> tuple[list, int]:
    family, tup = _family_for(c.id, c)
    res, rep = sharpness_search(c.id, family, tup, c.budget, c.seed, c.samples)
    row = rep.to_dict() | {"optim": res.to_dict(), "family": family.to_dict()}
    return [row], EXIT_OK


def cmd_mc(c: RunConfig) -> tuple[list, int]:
    n, m = _opt(c.n, 2), _opt(c.m, 2)
    if c.integral == "sphere":
        gamma = _opt(c.gamma, 1.0)
        est = estimate_sphere_product_integral(n, m, gamma, c.samples, c.seed)
        row = {"integral": "sphere", "n": n, "m": m, "gamma": gamma} | est.to_dict()
        if m == 2:
            row["reference"] = sphere_pair_reference(n, gamma)
    else:
        alpha = _opt(c.alpha, 0.25 * m * n)
        est = estimate_B_integral(n, m, alpha, c.samples, c.seed)
        row = {"integral": "B", "n": n, "m": m, "alpha": alpha} | est.to_dict()
        if m == 1:
            lam = n - alpha
            row["reference"] = riesz_composition_constant(n, lam, lam)
    if "reference" in row:
        row["z_score"] = (row["mean"] - row["reference"]) / row["stderr"]
    return [row], EXIT_OK


COMMANDS = {"constants": cmd_constants, "verify": cmd_verify, "sharpness": cmd_sharpness,
            "mc": cmd_mc}


# ------------------------------------------------------------ output

def _clean(x):
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x


def render(c: RunConfig, rows: list, exit_code: int) -> str:
    header = {"defaults": DEFAULTS, "config": c.to_dict(), "version": __version__,
              "exit_code": exit_code}
    if c.format == "csv":
        return _to_csv(header, rows)
    return json.dumps(_clean({"header": header, "results": rows}), sort_keys=True,
                      indent=2) + "\n"


CSV_COLUMNS = ["theorem", "id", "lhs", "rhs", "ratio", "value", "constant", "uncertainty",
               "slack", "verdict", "method", "seed", "mean", "stderr", "samples"]


def _to_csv(header: dict, rows: list) -> str:
    buf = io.StringIO()
    buf.write("# " + json.dumps(_clean(header), sort_keys=True) + "\n")
    cols = [k for k in CSV_COLUMNS if any(k in r for r in rows)]
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow(["" if r.get(k) is None else repr(r[k]) if isinstance(r.get(k), float)
                    else r[k] for k in cols])
    return buf.getvalue()


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    c = config_from_args(ns)
    try:
        rows, code = COMMANDS[c.subcommand](c)
    except (ConstraintViolation, RangeViolation) as e:
        diag = [str(r) for r in getattr(e, "residuals", [])]
        print(json.dumps({"error": type(e).__name__, "message": str(e), "residuals": diag},
                         sort_keys=True), file=sys.stderr)
        return EXIT_CONSTRAINT
    except NonConvergence as e:
        print(json.dumps({"error": "NonConvergence", "message": str(e)}), file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except SharpIneqError as e:
        print(json.dumps({"error": type(e).__name__, "message": str(e)}), file=sys.stderr)
        return EXIT_CONSTRAINT
    text = render(c, rows, code)
    if c.out:
        with open(c.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
