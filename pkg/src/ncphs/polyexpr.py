"""Conversions between expression trees and exact (word-)polynomials.

Relations, brackets and r-matrix coefficients are written in the expression
grammar.  Exact modules need them as polynomials in the formal parameters,
possibly with an ordered product of generators attached.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

from . import expr as E
from .errors import ExprError
from .params import PARAMS, ParamPoly, lam

WordPoly = dict  # tuple[str, ...] -> ParamPoly

_PARAM_ALIASES = {"eta": "eta", "kinv": "kinv", "z": "z", "zp": "zp"}


def _add_into(out: dict, word: tuple, coeff: ParamPoly) -> None:
    total = out.get(word)
    total = coeff if total is None else total + coeff
    if total.is_zero():
        out.pop(word, None)
    else:
        out[word] = total


def _mul_wordpolys(a: dict, b: dict) -> dict:
    out: dict = {}
    for wa, ca in a.items():
        for wb, cb in b.items():
            _add_into(out, wa + wb, ca * cb)
    return out


def _scalar_inverse(den: E.Expr) -> ParamPoly:
    """Exact inverse of an allowed denominator: rationals and powers of kappa."""
    if isinstance(den, E.Const):
        if not isinstance(den.value, Fraction) or den.value == 0:
            raise ExprError(f"cannot invert constant {den.value!r} exactly")
        return ParamPoly.const(1 / den.value)
    if isinstance(den, E.Var) and den.name == "kappa":
        return ParamPoly.param("kinv")
    if isinstance(den, E.Pow) and den.exp > 0:
        return _scalar_inverse(den.base) ** den.exp
    if isinstance(den, E.Mul):
        out = ParamPoly.const(1)
        for f in den.factors:
            out = out * _scalar_inverse(f)
        return out
    raise ExprError(f"denominator {E.to_string(den)} is not a rational multiple of a power of kappa")


def to_word_poly(e: E.Expr, generators: Iterable[str]) -> WordPoly:
    """Expand ``e`` into {ordered generator word: ParamPoly coefficient}.

    Products keep their printed order.  Allowed scalars: rationals, ``eta``,
    ``Lambda`` (= -eta**2), ``kinv``/``1/kappa``, ``z``, ``zp``.
    """
    gens = set(generators)
    return _to_wp(e, gens)


def _to_wp(e: E.Expr, gens: set) -> WordPoly:
    if isinstance(e, E.Const):
        if not isinstance(e.value, Fraction):
            raise ExprError(f"inexact constant {e.value!r} in an exact context")
        return {(): ParamPoly.const(e.value)} if e.value else {}
    if isinstance(e, E.Var):
        if e.name in gens:
            return {(e.name,): ParamPoly.const(1)}
        if e.name in _PARAM_ALIASES:
            return {(): ParamPoly.param(_PARAM_ALIASES[e.name])}
        if e.name == "Lambda":
            return {(): lam()}
        raise ExprError(f"unknown symbol {e.name!r} (not a generator or parameter)")
    if isinstance(e, E.Add):
        out: dict = {}
        for t in e.terms:
            for w, c in _to_wp(t, gens).items():
                _add_into(out, w, c)
        return out
    if isinstance(e, E.Neg):
        return {w: -c for w, c in _to_wp(e.arg, gens).items()}
    if isinstance(e, E.Mul):
        out = {(): ParamPoly.const(1)}
        for f in e.factors:
            out = _mul_wordpolys(out, _to_wp(f, gens))
        return out
    if isinstance(e, E.Pow):
        if e.exp < 0:
            return {(): _scalar_inverse(E.Pow(e.base, -e.exp))}
        out = {(): ParamPoly.const(1)}
        base = _to_wp(e.base, gens)
        for _ in range(e.exp):
            out = _mul_wordpolys(out, base)
        return out
    if isinstance(e, E.Div):
        inv = _scalar_inverse(e.den)
        return {w: c * inv for w, c in _to_wp(e.num, gens).items() if not (c * inv).is_zero()}
    raise ExprError(f"{E.to_string(e)} is not polynomial in generators and parameters")


def to_param_poly(e: E.Expr) -> ParamPoly:
    wp = to_word_poly(e, ())
    return wp.get((), ParamPoly())


def to_linear(e: E.Expr, generators: Iterable[str]) -> dict[str, ParamPoly]:
    """Linear combination of generators; rejects constants and higher words."""
    out = {}
    for w, c in to_word_poly(e, generators).items():
        if len(w) != 1:
            raise ExprError(f"{E.to_string(e)} is not linear in the generators")
        out[w[0]] = c
    return out


# ---------------------------------------------------------------------------
# back to expressions

def param_to_expr(p: ParamPoly) -> E.Expr:
    """Expression for a ParamPoly, writing kinv as 1/kappa."""
    terms = []
    for exp, c in sorted(p.terms.items(), reverse=True):
        factors: list[E.Expr] = [E.Const(c)]
        for name, k in zip(PARAMS, exp):
            if not k:
                continue
            if name == "kinv":
                factors.append(E.div(E.ONE, E.power(E.Var("kappa"), k)))
            else:
                factors.append(E.power(E.Var(name), k))
        terms.append(E.mul(*factors))
    return E.add(*terms)


def word_poly_to_expr(wp: Mapping[tuple, ParamPoly]) -> E.Expr:
    """Commutative reading of a word polynomial (products become ordinary products)."""
    terms = []
    for w, c in sorted(wp.items()):
        terms.append(E.mul(param_to_expr(c), *(E.Var(g) for g in w)))
    return E.add(*terms)


def param_point(values: Mapping[str, object]) -> dict:
    """Map user-facing parameter values (kappa, eta, z, zp) onto ParamPoly names."""
    out = dict(values)
    if "kappa" in values and "kinv" not in values:
        out["kinv"] = 1.0 / values["kappa"]
    return out
