"""Expression trees, exact parameter polynomials and the randomized oracle."""
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from ncphs import expr as E
from ncphs.errors import ExprError, SamplingError, SingularityError
from ncphs.params import PARAMS, ParamPoly

x, eta, u = E.Var("x"), E.Var("eta"), E.Var("u")


def fd(e, v, point, h=1e-5):
    up, dn = dict(point), dict(point)
    up[v] += h
    dn[v] -= h
    return (E.expr_eval(e, up) - E.expr_eval(e, dn)) / (2 * h)


# --- differentiation ------------------------------------------------------

def test_diff_sinh_over_eta_is_cosh():
    e = E.parse("sinh(eta*x)/eta")
    rep = E.equiv_random(E.diff(e, "x"), E.parse("cosh(eta*x)"), E.SamplePlan(n_points=50))
    assert rep.equivalent


def test_diff_constant_is_zero():
    assert E.diff(E.Const(Fraction(7)), "x") == E.ZERO


def test_diff_tanh_matches_finite_difference():
    e = E.tanh(eta * x)
    point = {"x": 0.3, "eta": 0.5}
    exact = E.expr_eval(E.diff(e, "x"), point)
    closed = 0.5 * (1 - math.tanh(0.15) ** 2)
    assert exact == pytest.approx(closed, abs=1e-15)
    assert abs(exact - fd(e, "x", point)) < 1e-7


def test_diff_undeclared_variable_raises():
    with pytest.raises(ExprError):
        E.diff(x * x, "y", declared=("x",))


CORPUS = [
    "sinh(eta*x)/eta", "tanh(eta*x)/eta", "cosh(eta*x)**2 - sinh(u)*x", "sqrt(1 + x**2)*exp(-u)",
    "sin(x*u)/(2 + cos(u))", "tanhc(eta, x)*sinhc(eta, u)", "x**3*u - 1/(3 + x*u)",
    "cosh(x)*cosh(u)*sinh(eta)/(1 + tanh(x)**2)", "sinc(eta, x*u)",
]


@pytest.mark.parametrize("text", CORPUS)
def test_diff_corpus_against_central_differences(text):
    e = E.parse(text)
    rng = np.random.default_rng(3)
    for _ in range(10):
        point = {"x": rng.uniform(-0.7, 0.7), "u": rng.uniform(-0.7, 0.7), "eta": rng.uniform(0.2, 0.7)}
        for v in ("x", "u", "eta"):
            exact = E.expr_eval(E.diff(e, v), point)
            approx = fd(e, v, point)
            assert abs(exact - approx) <= 1e-6 * (1 + abs(exact))


# --- evaluation -----------------------------------------------------------

def test_eval_cosh_at_zero_curvature():
    assert E.expr_eval(E.cosh(eta * x), {"eta": 0.0, "x": 1.0}) == 1.0


def test_sinc_like_limit_at_zero():
    e = E.parse("sinhc(eta, x)")
    assert E.expr_eval(e, {"eta": 0.0, "x": 0.37}) == 0.37
    assert E.expr_eval(e, {"eta": 1e-9, "x": 0.37}) == pytest.approx(0.37, rel=1e-15)


def test_tanh_quotient_against_high_precision():
    # frozen from an mpmath evaluation at 50 digits
    with mpmath.workdps(50):
        ref = float(mpmath.tanh(mpmath.mpf("0.2") * mpmath.mpf("0.3")) / mpmath.mpf("0.2"))
    assert ref == 0.29964051764571753
    e = E.parse("tanh(eta*x)/eta")
    assert E.expr_eval(e, {"eta": 0.2, "x": 0.3}) == pytest.approx(ref, rel=1e-15)


def test_eval_unassigned_variable():
    with pytest.raises(ExprError):
        E.expr_eval(x + u, {"x": 1.0})


def test_eval_singular_denominator():
    with pytest.raises(SingularityError):
        E.expr_eval(E.ONE / x, {"x": 1e-14})


# --- randomized oracle ----------------------------------------------------

def test_equiv_pythagorean_hyperbolic():
    a = E.cosh(u) ** 2 - E.sinh(u) ** 2
    assert E.equiv_random(a, E.ONE, E.SamplePlan()).equivalent


def test_equiv_rejects_tanh_vs_identity():
    plan = E.SamplePlan(ranges={"u": (0.5, 1.0)})
    rep = E.equiv_random(E.tanh(u), u, plan)
    assert not rep.equivalent
    assert rep.max_deviation > 0.03


def test_equiv_flat_limit_of_kappa_ads_entry():
    curved = E.parse("-(1/kappa)*tanh(eta*x3)/eta")
    flat = E.parse("-(1/kappa)*x3")
    plan = E.SamplePlan(fixed={"eta": 1e-6, "kappa": 1.0})
    assert E.equiv_random(curved, flat, plan, tol=1e-4).equivalent


def test_equiv_all_points_excluded():
    plan = E.SamplePlan(ranges={"x": (-0.01, 0.01)})
    with pytest.raises(SamplingError):
        E.equiv_random(E.ONE / x, E.ONE / x, plan)


def test_plan_validation():
    with pytest.raises(SamplingError):
        E.SamplePlan(n_points=0)
    with pytest.raises(SamplingError):
        E.SamplePlan(ranges={"x": (1.0, 1.0)})


def test_same_seed_same_points():
    plan = E.SamplePlan(seed=11, n_points=20)
    a = E.sample_points(plan, ["x", "u"])
    b = E.sample_points(plan, ["x", "u"])
    assert all(np.array_equal(a[k], b[k]) for k in a)


# --- grammar --------------------------------------------------------------

@pytest.mark.parametrize("text", CORPUS + [
    "-2*zp*sp*s3", "(1/kappa)*(cosh(eta1)*cosh(eta2)*cosh(eta3) - 1)", "z*(s0 + s1)*s2 - zp*s3**2",
    "-(eta**2/kappa)*s4", "x - 3*u", "1.5e-3*x",
])
def test_print_parse_round_trip(text):
    e = E.parse(text)
    s = E.to_string(e)
    assert E.parse(s) == e
    assert E.to_string(E.parse(s)) == s


def test_parse_rejects_garbage():
    for bad in ("x +", "foo(x)", "x = 1", "'a'", "x ** u"):
        with pytest.raises(ExprError):
            E.parse(bad)


# --- properties -----------------------------------------------------------

exprs = st.recursive(
    st.one_of(st.sampled_from([x, u, eta]), st.integers(-3, 3).map(lambda n: E.Const(Fraction(n)))),
    lambda kids: st.one_of(
        st.tuples(kids, kids).map(lambda t: E.add(*t)),
        st.tuples(kids, kids).map(lambda t: E.mul(*t)),
        st.tuples(kids, kids).map(lambda t: E.sub(*t)),
        kids.map(E.sinh), kids.map(E.cosh), kids.map(E.tanh),
        st.tuples(kids, st.integers(1, 3)).map(lambda t: E.power(*t)),
    ),
    max_leaves=8,
)


@given(exprs)
def test_round_trip_property(e):
    assert E.parse(E.to_string(e)) == e


@given(exprs, st.sampled_from(["x", "u", "eta"]))
def test_diff_property_against_finite_differences(e, v):
    point = {"x": 0.31, "u": -0.23, "eta": 0.47}
    exact = E.expr_eval(E.diff(e, v), point)
    value = E.expr_eval(e, point)
    if not math.isfinite(value) or abs(value) > 1e6:
        return
    assert abs(exact - fd(e, v, point)) <= 1e-6 * (1 + abs(exact))


def _finite(e, plan):
    vals = E.evaluate(e, E.sample_points(plan, E.free_vars(e)), check=False)
    return bool(np.all(np.isfinite(vals)))


@given(exprs, exprs, st.integers(0, 1000))
def test_oracle_reflexive_and_symmetric(a, b, seed):
    plan = E.SamplePlan(n_points=20, seed=seed)
    assume(_finite(a, plan) and _finite(b, plan))
    assert E.equiv_random(a, a, plan).equivalent
    try:
        ab = E.equiv_random(a, b, plan).equivalent
    except (SamplingError, SingularityError):
        return
    assert ab == E.equiv_random(b, a, plan).equivalent


polys = st.dictionaries(
    st.tuples(*[st.integers(0, 2)] * len(PARAMS)),
    st.fractions(min_value=-5, max_value=5, max_denominator=4), max_size=4,
).map(ParamPoly)


@given(polys, polys, polys)
def test_param_poly_is_a_commutative_ring(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == ParamPoly()
    assert all(v != 0 for v in (a * b).terms.values())


@given(polys, polys)
def test_param_poly_evaluation_is_a_homomorphism(a, b):
    vals = {"eta": 0.3, "kinv": -1.2, "z": 0.7, "zp": 0.11}
    assert (a * b).evaluate(vals) == pytest.approx(a.evaluate(vals) * b.evaluate(vals), abs=1e-9)
    assert (a + b).evaluate(vals) == pytest.approx(a.evaluate(vals) + b.evaluate(vals), abs=1e-9)


def test_param_poly_rejects_unknown_parameter():
    with pytest.raises(KeyError):
        ParamPoly.param("lambda")
