import json
import math

import pytest
from hypothesis import given, strategies as st

from sharpineq.errors import ConstraintViolation, RangeViolation
from sharpineq.exponents import ExponentTuple, Family, derive, dual, validate, assemble


def test_dual_endpoints():
    assert dual(2.0) == 2.0
    assert dual(1.0) == math.inf
    assert dual(math.inf) == 1.0
    assert dual(1.5) == pytest.approx(3.0)


@given(st.floats(1.001, 1e6))
def test_dual_is_an_involution(p):
    assert 1 / p + 1 / dual(p) == pytest.approx(1.0, rel=1e-12)
    assert dual(dual(p)) == pytest.approx(p, rel=1e-9)


@given(st.floats(2.0, 50.0), st.integers(1, 5), st.lists(st.floats(0.05, 0.95), min_size=5,
                                                          max_size=5))
def test_young_l2_weights_lie_on_the_simplex(q, m, cuts):
    # spread m/2 + 1/q over the 1/s_k, each inside (1/2, 1)
    total = m / 2 + 1 / q
    extra = total - m / 2
    w = [c for c in cuts[:m]]
    inv_s = [0.5 + extra * x / sum(w) for x in w]
    if any(not 0.5 < v < 1 for v in inv_s):
        return
    t = derive(Family.YoungL2, q=q, m=m, n=1, s=[1 / v for v in inv_s])
    lam = t.lambda_
    assert len(lam) == m + 1
    assert min(lam) >= -1e-12
    assert sum(lam) == pytest.approx(1.0, abs=1e-12)


def test_young_l2_rejects_a_broken_sum():
    with pytest.raises(ConstraintViolation) as e:
        derive(Family.YoungL2, q=2.0, m=2, n=1, s=(1.5, 1.5))
    assert e.value.residuals and e.value.residuals[0].kind == "constraint"


def test_hardy_weighted_needs_p_below_q():
    with pytest.raises(RangeViolation):
        derive(Family.HardyWeighted, p=4.0, q=2.0)
    with pytest.raises(RangeViolation):
        derive(Family.HardyWeighted, p=2.0, q=2.0)
    t = derive(Family.HardyWeighted, p=2.0, q=4.0)
    assert t.r == pytest.approx(4.0)


def test_multilinear_young_ranges():
    t = derive(Family.MYoung, p=1.5, q=3.0, m=2, n=1, s=(2.0, 2.0))
    assert 1 / t.q + t.m / t.p_prime == pytest.approx(sum(1 / s for s in t.s))
    with pytest.raises(RangeViolation):
        derive(Family.MYoung, p=3.0, q=2.0, m=1, n=1, s=(1.2,))


def test_restricted_family_caps_m():
    t = derive(Family.MYoungRestricted, p=1.25, q=2.0, m=2, n=1, s=(1 / 0.45, 1 / 0.45))
    assert t.m < t.p_prime / t.q_prime


@pytest.mark.parametrize("p,m", [(1.5, 2), (2.0, 3), (2.5, 3), (3.0, 3)])
def test_diag_young_derives_q(p, m):
    t = derive(Family.DiagYoung, p=p, m=m, n=1)
    assert 1 / t.p_prime == pytest.approx((m - 1) / (2 * t.q))


def test_supplied_q_must_match_the_derived_one():
    with pytest.raises(ConstraintViolation):
        derive(Family.DiagYoung, p=1.5, q=7.0, m=2, n=1)


def test_diag_mhls_gamma():
    t = derive(Family.DiagMHLS, p=2.0, m=3, n=1)
    assert t.gamma == pytest.approx(0.5)
    assert t.gamma == pytest.approx(t.n / t.q)
    with pytest.raises(RangeViolation):
        derive(Family.DiagMHLS, p=3.0, m=3, n=1)


def test_trace_l2_fields():
    t = derive(Family.TraceL2, q=4.0, m=2, n=1)
    assert t.gamma == pytest.approx(0.75)
    assert t.alpha == pytest.approx(1.25)


def test_stein_weiss_balance():
    t = derive(Family.SteinWeiss, p=1.5, m=2, n=1, beta=0.2)
    assert 2 * t.n / t.p_prime == pytest.approx(2 * t.beta + (t.m - 1) * t.gamma)


def test_exp_density_q_is_dual():
    assert derive(Family.ExpDensity, p=1.5).q == pytest.approx(3.0)
    with pytest.raises(RangeViolation):
        derive(Family.ExpDensity, p=2.5)


def test_trace_fractional_alpha():
    t = derive(Family.TraceFractional, q=3.0, m=1, n=1)
    assert t.alpha == pytest.approx(0.5 - 1 / 3)


def test_validate_reports_without_raising():
    t = assemble(Family.HardyWeighted, p=3.0, q=2.0)
    res = validate(t)
    assert any(r.kind == "range" for r in res)


def test_round_trip_through_json():
    t = derive(Family.YoungL2, q=2.0, m=2, n=1, s=(4 / 3, 4 / 3))
    d = json.loads(t.to_json())
    assert d["family"] == "YoungL2"
    back = ExponentTuple.from_dict(d)
    assert back == t
    h = derive(Family.HardyWeighted, p=2.0, q=4.0)
    assert ExponentTuple.from_dict(json.loads(h.to_json())) == h
