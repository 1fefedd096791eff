"""Closed-form bracket catalog: lookup, serialization, Jacobi, limits, superposition."""
import json
import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from ncphs import catalog as C
from ncphs import expr as E
from ncphs.errors import CatalogError

CAT = C.load_catalog()


def plan(name, n=100, seed=0, **fixed):
    return CAT[name].domain.plan(n_points=n, seed=seed, overrides=fixed)


# --- independent transcriptions -------------------------------------------

eta, kappa = sp.symbols("eta kappa", positive=True)
x0, x1, x2, x3 = sp.symbols("x0:4")
e1, e2, e3, y1, y2, y3 = sp.symbols("eta1 eta2 eta3 y1 y2 y3")

PHS = {
    ("x0", "x1"): -sp.tanh(eta * x1) / (kappa * eta * sp.cosh(eta * x2) ** 2 * sp.cosh(eta * x3) ** 2),
    ("x0", "x2"): -sp.tanh(eta * x2) / (kappa * eta * sp.cosh(eta * x3) ** 2),
    ("x0", "x3"): -sp.tanh(eta * x3) / (kappa * eta),
    ("x1", "x2"): -sp.cosh(eta * x1) * sp.tanh(eta * x3) ** 2 / (kappa * eta),
    ("x1", "x3"): sp.cosh(eta * x1) * sp.tanh(eta * x2) * sp.tanh(eta * x3) / (kappa * eta),
    ("x2", "x3"): -sp.sinh(eta * x1) * sp.tanh(eta * x3) / (kappa * eta),
}

_C = sp.cosh(e1) * sp.cosh(e2) * sp.cosh(e3)
TIMELIKE = {
    ("y1", "y2"): (y2 * sp.sinh(e1) - y1 * sp.tanh(e2) / sp.cosh(e3)) / kappa,
    ("y1", "y3"): (y3 * sp.sinh(e1) - y1 * sp.tanh(e3)) / kappa,
    ("y2", "y3"): (y3 * sp.cosh(e1) * sp.sinh(e2) - y2 * sp.tanh(e3)) / kappa,
    ("y1", "eta1"): (_C - 1) / (kappa * sp.cosh(e2) * sp.cosh(e3)),
    ("y2", "eta2"): (_C - 1) / (kappa * sp.cosh(e3)),
    ("y3", "eta3"): (_C - 1) / kappa,
}
SPACELIKE = {
    ("y1", "y2"): -y1 * sp.tanh(e2) * sp.tanh(e3) / kappa,
    ("y1", "y3"): y1 / (kappa * sp.cosh(e3)),
    ("y2", "y3"): y2 / (kappa * sp.cosh(e3)),
    ("y1", "eta1"): -sp.tanh(e3) / (kappa * sp.cosh(e2)),
    ("y2", "eta2"): -sp.tanh(e3) / kappa,
    ("y3", "eta3"): -sp.sinh(e3) / kappa,
}


def compare_to_sympy(name, reference, params, seed):
    entry = CAT[name]
    rng = np.random.default_rng(seed)
    syms = {s.name: s for e in reference.values() for s in e.free_symbols}
    for _ in range(20):
        pt = {c: rng.uniform(-0.8, 0.8) for c in entry.coordinates}
        pt.update(params)
        for (a, b), ref in reference.items():
            want = float(ref.subs({syms[k]: v for k, v in pt.items() if k in syms}))
            got = complex(E.evaluate(entry.bracket(a, b), pt))
            assert got.real == pytest.approx(want, rel=1e-12, abs=1e-14)
            assert complex(E.evaluate(entry.bracket(b, a), pt)).real == pytest.approx(-want, rel=1e-12, abs=1e-14)


def test_kappa_ads_phs_matches_transcription():
    compare_to_sympy("kappa-ads-phs", PHS, {"eta": 0.5, "kappa": 1.3}, 0)


def test_worldline_tables_match_transcription():
    compare_to_sympy("worldlines-timelike", TIMELIKE, {"kappa": 0.7}, 1)
    compare_to_sympy("worldlines-spacelike", SPACELIKE, {"kappa": 0.7}, 2)


def test_sympy_poisson_jacobi_for_phs():
    """Second route: Jacobi from sympy derivatives of the transcription."""
    xs = (x0, x1, x2, x3)
    names = tuple(s.name for s in xs)

    def br(i, j):
        if i == j:
            return sp.Integer(0)
        key = (names[i], names[j])
        return PHS[key] if key in PHS else -PHS[(names[j], names[i])]

    rng = np.random.default_rng(3)
    pts = [dict(zip(xs, rng.uniform(-0.8, 0.8, 4))) for _ in range(5)]
    for a, b, c in [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]:
        jac = sum(br(p, k) * sp.diff(br(q, r), xs[k])
                  for p, q, r in ((a, b, c), (b, c, a), (c, a, b)) for k in range(4))
        f = sp.lambdify((eta, kappa) + xs, jac, "math")
        for pt in pts:
            assert abs(f(0.5, 1.0, *pt.values())) <= 1e-12


# --- lookup ---------------------------------------------------------------

def test_lookup_examples():
    km = C.catalog_lookup("kappa-minkowski")
    assert km.kind == "quantum-linear"
    assert E.to_string(km.bracket("x0", "x1")) == "-(1/kappa)*x1"
    assert E.to_string(km.bracket("x1", "x0")) == "(1/kappa)*x1"
    assert km.bracket("x1", "x2") == E.ZERO
    assert C.catalog_lookup("kappa-ads-phs").kind == "poisson"
    with pytest.raises(CatalogError):
        C.catalog_lookup("kappa-poincare")
    with pytest.raises(CatalogError):
        km.bracket("x0", "s1")


def test_required_entries_present():
    for name in ("kappa-minkowski", "kappa-ads-phs", "kappa-ads-quadratic", "lorentz-type-I-z",
                 "lorentz-type-I-zp", "lorentz-type-II", "lorentz-type-III", "worldlines-timelike",
                 "worldlines-spacelike", "worldlines-lightlike", "ambient-map"):
        assert name in CAT and CAT[name].citation


def test_quadratic_table_values():
    q = CAT["kappa-ads-quadratic"]
    pt = {"s0": 0.3, "s1": -0.2, "s2": 0.5, "s3": 0.4, "s4": 1.1, "eta": 0.5, "kappa": 2.0}
    assert E.evaluate(q.bracket("s1", "s2"), pt) == pytest.approx(-0.25 * 0.4 ** 2)
    assert E.evaluate(q.bracket("s0", "s1"), pt) == pytest.approx(-0.5 * -0.2 * 1.1)
    assert E.evaluate(q.bracket("s1", "s4"), pt) == pytest.approx(-0.125 * 0.3 * -0.2)


# --- serialization --------------------------------------------------------

def test_round_trip_is_bit_exact():
    text = C.catalog_text()
    assert C.dumps(C.loads(text)) == text


def test_round_trip_preserves_values():
    again = C.loads(C.dumps(CAT))
    for name, entry in CAT.items():
        assert again[name].table == entry.table
        assert again[name].components == entry.components


def test_loader_errors():
    data = json.loads(C.catalog_text())
    bad = dict(data, version=2)
    with pytest.raises(CatalogError, match="version"):
        C.loads(json.dumps(bad))
    with pytest.raises(CatalogError):
        C.loads(json.dumps(dict(data, format="other")))
    stray = json.loads(C.catalog_text())
    stray["entries"][0]["table"][0][2] = "w*x1"
    with pytest.raises(CatalogError, match="undeclared"):
        C.loads(json.dumps(stray))
    dup = json.loads(C.catalog_text())
    dup["entries"].append(dup["entries"][0])
    with pytest.raises(CatalogError, match="duplicate"):
        C.loads(json.dumps(dup))


def test_entry_validation():
    with pytest.raises(CatalogError):
        C.CatalogEntry("t", "poisson", ("a", "b"), (), "c", table={("a", "a"): E.ONE})
    with pytest.raises(CatalogError):
        C.CatalogEntry("t", "poisson", ("a", "b"), (), "c", table={("a", "b"): E.ONE, ("b", "a"): E.ONE})
    with pytest.raises(CatalogError):
        C.CatalogEntry("t", "nonsense", ("a", "b"), (), "c")
    with pytest.raises(CatalogError):
        CAT["ambient-map"].bracket_table()


# --- Poisson-Jacobi -------------------------------------------------------

@pytest.mark.parametrize("name", ["kappa-minkowski", "kappa-ads-phs", "lorentz-type-II",
                                  "lorentz-type-III-cartesian", "lorentz-type-I-cartesian",
                                  "worldlines-timelike", "worldlines-spacelike", "worldlines-lightlike"])
def test_poisson_jacobi(name):
    res = C.poisson_jacobi_check(CAT[name], plan(name))
    assert res.passed, res.witness
    assert res.max_deviation <= 1e-8


def test_phs_jacobi_in_de_sitter():
    res = C.poisson_jacobi_check(CAT["kappa-ads-phs"], plan("kappa-ads-phs", eta=complex(0, math.sqrt(0.3))))
    assert res.passed


def test_quadratic_first_order_jacobi():
    assert C.poisson_jacobi_check(CAT["kappa-ads-quadratic"], plan("kappa-ads-quadratic"), first_order=True).passed


def test_sign_flip_breaks_jacobi():
    e = CAT["kappa-ads-phs"]
    bad = e.with_entry("x1", "x2", E.neg(e.bracket("x1", "x2")))
    res = C.poisson_jacobi_check(bad, plan("kappa-ads-phs"))
    assert not res.passed
    assert set(res.witness["triple"]) >= {"x1", "x2"}
    assert res.max_deviation > 1e-3


@given(st.sampled_from(sorted(n for n, e in CAT.items() if not e.is_map)), st.integers(0, 1000))
def test_tables_antisymmetric(name, seed):
    assert C.antisymmetry_check(CAT[name], plan(name, n=20, seed=seed)).passed


# --- limits, superposition, null plane ------------------------------------

def test_flat_limit_phs():
    res = C.flat_limit_check(CAT["kappa-ads-phs"], CAT["kappa-minkowski"], plan("kappa-ads-phs"))
    assert res.passed and res.max_deviation <= 1e-4


def test_flat_limit_ambient_map():
    res = C.flat_limit_check(CAT["ambient-map"], CAT["cartesian-map"], plan("ambient-map"))
    assert res.passed and res.max_deviation <= 1e-4


def test_flat_limit_quadratic():
    res = C.flat_limit_check(CAT["kappa-ads-quadratic"], CAT["kappa-minkowski"], plan("kappa-ads-quadratic"),
                             substitution={"s0": "x0", "s1": "x1", "s2": "x2", "s3": "x3", "s4": "1"})
    assert res.passed


def test_flat_limit_detects_wrong_limit():
    wrong = CAT["kappa-minkowski"].with_entry("x0", "x1", E.parse("-(2/kappa)*x1"))
    assert not C.flat_limit_check(CAT["kappa-ads-phs"], wrong, plan("kappa-ads-phs")).passed


def test_type_i_superposition():
    res = C.superposition_check(CAT["lorentz-type-I-z"], CAT["lorentz-type-I-zp"], CAT["lorentz-type-I"],
                                plan("lorentz-type-I"))
    assert res.passed


@pytest.mark.parametrize("fixed,part", [({"zp": 0.0}, "lorentz-type-I-z"), ({"z": 0.0}, "lorentz-type-I-zp")])
def test_type_i_reduces_to_one_parameter(fixed, part):
    assert C.table_equivalence_check(CAT["lorentz-type-I"], CAT[part], plan("lorentz-type-I", **fixed)).passed


def test_type_i_vanishes_without_parameters():
    res = C.antisymmetry_check(CAT["lorentz-type-I"], plan("lorentz-type-I", z=0.0, zp=0.0))
    assert res.passed
    vals = CAT["lorentz-type-I"].bracket_table().evaluate({"sp": 0.3, "sm": 0.1, "s2": 0.2, "s3": -0.4,
                                                            "z": 0.0, "zp": 0.0})
    assert not np.any(vals)


def test_superposition_detects_mismatch():
    wrong = CAT["lorentz-type-I"].with_entry("s2", "s3", E.parse("zp*sp**2"))
    assert not C.superposition_check(CAT["lorentz-type-I-z"], CAT["lorentz-type-I-zp"], wrong,
                                     plan("lorentz-type-I")).passed


@pytest.mark.parametrize("null,cart", [("lorentz-type-I", "lorentz-type-I-cartesian"),
                                       ("lorentz-type-III", "lorentz-type-III-cartesian")])
def test_null_plane(null, cart):
    assert C.null_plane_check(CAT[null], CAT[cart], plan(cart)).passed


def test_map_evaluation():
    vals = C.evaluate_map(CAT["ambient-map"], {"x0": 0.0, "x1": 0.0, "x2": 0.0, "x3": 0.0, "eta": 0.5})
    assert vals == {"s4": 1.0, "s0": 0.0, "s1": 0.0, "s2": 0.0, "s3": 0.0}
    with pytest.raises(CatalogError):
        C.evaluate_map(CAT["kappa-minkowski"], {})


def test_pseudosphere_extra_on_ambient_map():
    amb = CAT["ambient-map"]
    rng = np.random.default_rng(4)
    for _ in range(10):
        pt = dict(zip(("x0", "x1", "x2", "x3"), rng.uniform(-0.8, 0.8, 4)))
        pt["eta"] = 0.5
        s = C.evaluate_map(amb, pt)
        assert E.evaluate(amb.extras["pseudosphere"], {**s, "eta": 0.5}) == pytest.approx(1.0, abs=1e-12)


def test_first_order_part():
    e = E.parse("-(eta**2/kappa)*(s1**2 + (eta/kappa)*s1*s2)")
    fo = C.first_order_part(e, ("s1", "s2"))
    pt = {"eta": 0.5, "kappa": 2.0, "s1": 0.3, "s2": 0.7}
    assert E.evaluate(fo, pt) == pytest.approx(-0.125 * 0.09)


def test_full_quadratic_table_is_not_poisson():
    # the (eta/kappa)*s1*s2 correction is a quantum-ordering term, not part of a Poisson bracket
    res = C.poisson_jacobi_check(CAT["kappa-ads-quadratic"], plan("kappa-ads-quadratic"))
    assert not res.passed and res.witness["triple"] == ("s0", "s1", "s4")
