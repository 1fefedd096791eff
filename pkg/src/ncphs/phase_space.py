"""Deformed phase spaces of the worldline algebras.

Commuting variables eta1..eta3, noncommuting y1..y3 with

    [y_a, eta_b] = delta_ab F_a(eta),    [y_a, y_b] = sum_c C^c_ab(eta) y_c.

Elements are finite sums f(eta) * (ordered y-monomial), functions on the
left.  Moving a y past a function uses the derivation rule
``y_a f = f y_a + F_a * df/deta_a``.  Coefficient identities are checked
with the randomized oracle.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np

from . import expr as E
from .errors import RewriteError
from .results import CheckResult

ETAS = ("eta1", "eta2", "eta3")
YS = ("y1", "y2", "y3")

Element = dict  # sorted y-word -> Expr coefficient


def _acc(out: dict, w: tuple, c: E.Expr) -> None:
    if isinstance(c, E.Const) and c.value == 0:
        return
    if w not in out:
        out[w] = c
    elif out[w] == E.neg(c) or E.neg(out[w]) == c:
        del out[w]
    else:
        out[w] = E.add(out[w], c)


@dataclass
class DeformedPhaseSpace:
    name: str
    F: Mapping[str, E.Expr]  # y_a -> F_a
    yy: Mapping[tuple[str, str], Mapping[str, E.Expr]]  # (y_a, y_b), a < b -> {y_c: C^c_ab}
    parameters: Mapping[str, float]

    @classmethod
    def from_catalog(cls, entry, plan: E.SamplePlan | None = None) -> "DeformedPhaseSpace":
        """Read F_a and the y-y coefficients off a worldline table.

        The y-y right-hand sides must be linear in the y's; this is checked on
        a random sample (``plan``, defaulting to the entry's domain).
        """
        plan = plan or entry.domain.plan(n_points=30)
        F = {}
        for a, eta in zip(YS, ETAS):
            F[a] = entry.bracket(a, eta)
            for other in ETAS:
                if other != eta and not _is_zero(entry.bracket(a, other)):
                    raise RewriteError(f"{entry.name}: [{a}, {other}] must vanish")
            if set(E.free_vars(F[a])) & set(YS):
                raise RewriteError(f"{entry.name}: [{a}, {eta}] depends on y")
        for x, y in combinations(ETAS, 2):
            if not _is_zero(entry.bracket(x, y)):
                raise RewriteError(f"{entry.name}: [{x}, {y}] must vanish")
        yy = {}
        for a, b in combinations(YS, 2):
            rhs = entry.bracket(a, b)
            coeffs = {}
            for c in YS:
                d = E.diff(rhs, c)
                if not _is_zero(d):
                    coeffs[c] = d
            linear = E.add(*[E.mul(v, E.Var(c)) for c, v in coeffs.items()])
            report = E.equiv_random(rhs, linear, plan)
            if not report.equivalent:
                raise RewriteError(f"{entry.name}: [{a}, {b}] is not linear in y")
            for c, v in coeffs.items():
                if set(E.free_vars(v)) & set(YS):
                    raise RewriteError(f"{entry.name}: [{a}, {b}] is not linear in y")
            yy[(a, b)] = coeffs
        return cls(entry.name, F, yy, dict(entry.domain.parameters))

    # --- elements ---------------------------------------------------------

    @staticmethod
    def y(a: str) -> Element:
        return {(a,): E.ONE}

    @staticmethod
    def eta(a: str) -> Element:
        return {(): E.Var(a)}

    @staticmethod
    def function(f: E.Expr) -> Element:
        if set(E.free_vars(f)) & set(YS):
            raise RewriteError("a function coefficient may not contain y")
        return {(): f}

    @staticmethod
    def scale(f: E.Expr, x: Element) -> Element:
        """Left multiplication by a function of eta."""
        return {w: E.mul(f, c) for w, c in x.items()}

    @staticmethod
    def add(*xs: Element) -> Element:
        out: dict = {}
        for x in xs:
            for w, c in x.items():
                _acc(out, w, c)
        return out

    @classmethod
    def sub(cls, x: Element, y: Element) -> Element:
        return cls.add(x, {w: E.neg(c) for w, c in y.items()})

    def bracket_yy(self, a: str, b: str) -> Element:
        if a == b:
            return {}
        if (a, b) in self.yy:
            return {(c,): v for c, v in self.yy[(a, b)].items()}
        return {(c,): E.neg(v) for c, v in self.yy[(b, a)].items()}

    def _y_times_word(self, a: str, w: tuple) -> Element:
        """y_a * y^w with y^w ordered, in normal form."""
        if not w or YS.index(a) <= YS.index(w[0]):
            return {(a,) + w: E.ONE}
        # y_a y_b = y_b y_a + [y_a, y_b]
        head = self.y_mul(w[0], self._y_times_word(a, w[1:]))
        rest = {}
        for (c,), v in self.bracket_yy(a, w[0]).items():
            rest = self.add(rest, self.scale(v, self._y_times_word(c, w[1:])))
        return self.add(head, rest)

    def y_mul(self, a: str, x: Element) -> Element:
        """y_a * x for x in normal form."""
        eta = ETAS[YS.index(a)]
        out: dict = {}
        for w, f in x.items():
            out = self.add(out, self.scale(f, self._y_times_word(a, w)))
            df = E.diff(f, eta)
            if not _is_zero(df):
                _acc(out, w, E.mul(self.F[a], df))
        return out

    def mul(self, x: Element, y: Element) -> Element:
        out: dict = {}
        for w, f in x.items():
            part = y
            for a in reversed(w):
                part = self.y_mul(a, part)
            out = self.add(out, self.scale(f, part))
        return out

    def check_shape(self, x: Element) -> None:
        for w, c in x.items():
            if any(g not in YS for g in w) or list(w) != sorted(w, key=YS.index):
                raise RewriteError(f"element word {w} is not an ordered y-monomial")
            if set(E.free_vars(c)) & set(YS):
                raise RewriteError("element coefficient contains y")


def _is_zero(e: E.Expr) -> bool:
    return isinstance(e, E.Const) and e.value == 0


def phase_space_commutator(D: DeformedPhaseSpace, a: Element, b: Element) -> Element:
    D.check_shape(a)
    D.check_shape(b)
    return D.sub(D.mul(a, b), D.mul(b, a))


def element_equiv(x: Element, y: Element, plan: E.SamplePlan, tol: float = 1e-9) -> CheckResult:
    """Coefficientwise randomized comparison of two elements."""
    worst, witness = 0.0, None
    for w in sorted(set(x) | set(y)):
        rep = E.equiv_random(x.get(w, E.ZERO), y.get(w, E.ZERO), plan, tol=tol)
        if rep.max_scaled_deviation > worst or not rep.equivalent:
            worst = max(worst, rep.max_scaled_deviation)
            if not rep.equivalent and witness is None:
                witness = {"word": w, "point": rep.worst_point}
    return CheckResult(witness is None, witness, worst)


def generators(D: DeformedPhaseSpace) -> dict[str, Element]:
    out = {a: D.y(a) for a in YS}
    out.update({e: D.eta(e) for e in ETAS})
    return out


def phase_space_jacobi(D: DeformedPhaseSpace, plan: E.SamplePlan, tol: float = 1e-9) -> CheckResult:
    gens = generators(D)
    worst = 0.0
    n = 0
    for a, b, c in combinations(sorted(gens, key=lambda g: (g[0] != "e", g)), 3):
        x, y, z = gens[a], gens[b], gens[c]
        total = D.add(phase_space_commutator(D, phase_space_commutator(D, x, y), z),
                      phase_space_commutator(D, phase_space_commutator(D, y, z), x),
                      phase_space_commutator(D, phase_space_commutator(D, z, x), y))
        res = element_equiv(total, {}, plan, tol)
        n += 1
        worst = max(worst, res.max_deviation or 0.0)
        if not res.passed:
            return CheckResult(False, {"triple": (a, b, c), **res.witness}, worst, "Jacobi fails")
    return CheckResult(True, None, worst, f"{n} triples")


def darboux_elements(D: DeformedPhaseSpace, entry, plan: E.SamplePlan) -> tuple[dict, dict]:
    """q_a = G_a(eta) y_a and p_a = eta_a from a Darboux map entry (functions to the left)."""
    q, p = {}, {}
    for k, (y, eta) in enumerate(zip(YS, ETAS), start=1):
        qa = entry.components[f"q{k}"]
        g = E.diff(qa, y)
        if set(E.free_vars(g)) & set(YS) or not E.equiv_random(qa, E.mul(g, E.Var(y)), plan).equivalent:
            raise RewriteError(f"{entry.name}: q{k} must be a function of eta times {y}")
        q[f"q{k}"] = {(y,): g}
        pa = entry.components[f"p{k}"]
        if set(E.free_vars(pa)) & set(YS):
            raise RewriteError(f"{entry.name}: p{k} must be a function of eta")
        p[f"p{k}"] = {(): pa}
    return q, p


def darboux_verify(D: DeformedPhaseSpace, q: Mapping[str, Element], p: Mapping[str, Element],
                   plan: E.SamplePlan, tol: float = 1e-9) -> CheckResult:
    """[q_a, p_b] = (1/kappa) delta_ab, [q_a, q_b] = 0 = [p_a, p_b]."""
    kinv = E.div(E.ONE, E.Var("kappa"))
    qs, ps = sorted(q), sorted(p)
    checks = []
    for i, qa in enumerate(qs):
        for j, pb in enumerate(ps):
            checks.append(((qa, pb), q[qa], p[pb], {(): kinv} if i == j else {}))
    for x, y in combinations(qs, 2):
        checks.append(((x, y), q[x], q[y], {}))
    for x, y in combinations(ps, 2):
        checks.append(((x, y), p[x], p[y], {}))
    worst = 0.0
    for names, a, b, expected in checks:
        res = element_equiv(phase_space_commutator(D, a, b), expected, plan, tol)
        worst = max(worst, res.max_deviation or 0.0)
        if not res.passed:
            return CheckResult(False, {"pair": names, **res.witness}, worst, "canonical relation fails")
    return CheckResult(True, None, worst, f"{len(checks)} relations")


def semiclassical_table(D: DeformedPhaseSpace, order: Sequence[str]) -> dict[tuple[str, str], E.Expr]:
    """Commutators among generators read as Poisson brackets (functions of commuting y, eta)."""
    gens = generators(D)
    out = {}
    for a, b in combinations(order, 2):
        comm = phase_space_commutator(D, gens[a], gens[b])
        terms = [E.mul(c, *(E.Var(g) for g in w)) for w, c in comm.items()]
        out[(a, b)] = E.add(*terms)
    return out


def evaluate_table(table: Mapping[tuple[str, str], E.Expr], order: Sequence[str],
                   point: Mapping[str, object]) -> np.ndarray:
    n = len(order)
    out = np.zeros((n, n), dtype=complex)
    for (a, b), e in table.items():
        v = complex(E.evaluate(e, point))
        i, j = order.index(a), order.index(b)
        out[i, j], out[j, i] = v, -v
    return out
