"""Acceptance criteria, one test each, at the stated tolerances.

Each test prints a PASS/FAIL line; the lines are repeated in the pytest
terminal summary under "acceptance criteria".
"""
import time

import pytest

from ncphs import catalog as C
from ncphs import chart as CH
from ncphs import lie as L
from ncphs import suites as S

SUITES = S.load_suites()
ALL = {c.name: c for c in SUITES["all"]}


def run(names, **config):
    missing = [n for n in names if n not in ALL]
    assert not missing, missing
    t0 = time.perf_counter()
    report = S.run_suite(S.SuiteConfig("acceptance", **config), [ALL[n] for n in names])
    return report, time.perf_counter() - t0


def verdicts(report):
    return {r.name: r.verdict for r in report.records}


def worst(report, names):
    return max(report.record(n).max_deviation or 0.0 for n in names)


def failed(report):
    return [r.name for r in report.records if r.verdict != "pass"]


def test_1_classification(accept):
    t0 = time.perf_counter()
    report = S.run_suite(S.SuiteConfig("bialgebra-classification"))
    elapsed = time.perf_counter() - t0
    exact = []
    for name in ("r_I", "r_II", "r_III", "r_lightlike"):
        g, r = L.load_rmatrix(name)
        exact.append(L.schouten(g, r).is_zero())
    quasi = [L.mcybe_check(*L.load_rmatrix(n)).classification for n in ("r0", "r_Lambda")]
    ok = report.ok and all(exact) and quasi == [L.QUASITRIANGULAR] * 2 and elapsed < 5
    accept("1 classification", ok,
           f"{report.summary['pass']}/{report.summary['total']} checks, r0/r_Lambda {quasi}, "
           f"Schouten identically zero for r_I, r_II, r_III, r_lightlike: {all(exact)}, {elapsed:.2f} s")


def test_2_coisotropy_and_subgroup(accept):
    names = ["coisotropy/r0", "coisotropy/r_Lambda", "subgroup/r0-fails", "subgroup/r_Lambda-fails",
             "subgroup/r_I", "subgroup/r_II", "subgroup/r_III"]
    report, _ = run(names)
    g = L.load_algebra()
    direct = []
    for n in ("r0", "r_Lambda"):
        d = L.cocommutator_from_r(g, L.load_rmatrix(n)[1])
        direct.append(L.coisotropy_check(g, d).passed and not L.subgroup_check(g, d).passed)
    for n in ("r_I", "r_II", "r_III"):
        direct.append(L.subgroup_check(g, L.cocommutator_from_r(g, L.load_rmatrix(n)[1])).passed)
    accept("2 coisotropy/subgroup", report.ok and all(direct),
           f"{report.summary['pass']}/{len(names)} checks; r0, r_Lambda coisotropic only; r_I..r_III sub-bialgebra")


def test_2b_screen_membership(accept):
    names = ["screen/r_I", "screen/r_II", "screen/r_III", "screen/r_Lambda-outside", "screen/dimension"]
    report, _ = run(names)
    accept("2b screen membership", report.ok,
           f"r_I, r_II, r_III in the screened space of dimension 15, r_Lambda outside ({failed(report) or 'all pass'})")


def test_3_first_order_space(accept):
    report, _ = run(["first-order/kappa-minkowski"])
    accept("3 first-order space", report.ok, report.records[0].detail or "kappa-Minkowski table reproduced exactly")


def test_4_sklyanin_vs_catalog(accept):
    names = ["sklyanin/kappa-minkowski", "sklyanin/kappa-ads-phs", "sklyanin/kappa-ds-phs",
             "sklyanin/worldlines-timelike", "sklyanin/worldlines-spacelike", "sklyanin/worldlines-lightlike"]
    report, elapsed = run(names, eta=0.5, kappa=1.0, points=100)
    dev = worst(report, names)
    ok = report.ok and dev <= 1e-8 and elapsed < 60
    accept("4 Sklyanin vs catalog", ok, f"6 tables x 100 points, max deviation {dev:.1e} (tol 1e-8), {elapsed:.1f} s")


def test_5_ambient_pipeline(accept):
    sphere = ["pseudosphere/ads", "pseudosphere/ds"]
    quad = ["pushforward/kappa-ads-quadratic", "pushforward/kappa-ds-quadratic"]
    central = [f"s4-central/{t}-{s}" for t in ("r_I", "r_II", "r_III") for s in ("ads", "minkowski", "ds")]
    table = [f"pushforward/{t}-{s}" for t in ("r_I", "r_II", "r_III") for s in ("ads", "minkowski", "ds")]
    report, _ = run(sphere + quad + central + table)
    devs = [worst(report, sphere), worst(report, quad), worst(report, central), worst(report, table)]
    ok = report.ok and devs[0] <= 1e-12 and devs[1] <= 1e-8 and devs[2] <= 1e-9 and devs[3] <= 1e-8
    accept("5 ambient pipeline", ok,
           "pseudosphere {:.1e} (1e-12), quadratic {:.1e} (1e-8), s4 central {:.1e} (1e-9), "
           "type I-III tables {:.1e} (1e-8)".format(*devs))


def test_6_quantum_algebras(accept):
    names = ["nc-jacobi/kappa-ads-quadratic", "nc-jacobi/lorentz-type-I-z", "nc-jacobi/lorentz-type-I-zp",
             "nc-jacobi/lorentz-type-II", "nc-jacobi/lorentz-type-III", "casimir/kappa-ads-quadratic",
             "casimir/kappa-ads-classical-fails"]
    report, _ = run(names)
    witness = report.record("casimir/kappa-ads-classical-fails").witness
    ok = report.ok and bool(witness) and witness.get("commutator") not in (None, "0")
    accept("6 quantum algebras", ok,
           f"Jacobi exact for 5 algebras, Casimir central, classical Sigma fails: "
           f"[Sigma, {witness['generator']}] has {len(witness['commutator'].split(' + '))} nonzero terms")


def test_7_worldline_quantum(accept):
    names = [f"phase-space-jacobi/{k}" for k in ("timelike", "spacelike", "lightlike")]
    names += [f"darboux/{k}" for k in ("timelike", "spacelike", "lightlike")]
    names += ["superposition/worldlines-lightlike"]
    report, _ = run(names, points=100)
    dev = worst(report, names)
    accept("7 worldline phase spaces", report.ok and dev <= 1e-9,
           f"Jacobi, Darboux and lightlike = timelike + spacelike at 100 points, max deviation {dev:.1e} (tol 1e-9)")


def test_8_limits(accept):
    names = ["flat-limit/kappa-ads-phs", "flat-limit/ambient-map"]
    report, _ = run(names)
    dev = worst(report, names)
    accept("8 flat limits", report.ok and dev <= 1e-4, f"eta = 1e-6, max deviation {dev:.1e} (tol 1e-4)")


def test_9_properties(accept):
    report = S.run_suite(S.SuiteConfig("properties", points=100))
    pj = [r.name for r in report.records if r.name.startswith("property/poisson-jacobi/")]
    conf = [r for r in report.records if r.name.startswith("property/confluence/")]
    dev = worst(report, pj)
    ok = report.ok and dev <= 1e-8 and all(r.detail == "500 words" for r in conf)
    accept("9 property suites", ok,
           f"{report.summary['pass']}/{report.summary['total']} checks, {len(conf)} x 500-word confluence, "
           f"Poisson-Jacobi max {dev:.1e} (tol 1e-8), failures: {failed(report) or 'none'}")
