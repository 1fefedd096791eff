"""Exact multivariate polynomials over the rationals in the formal deformation parameters.

The parameter list is fixed and ordered: ``eta`` (curvature parameter, with
Lambda = -eta**2), ``kinv`` (1/kappa), ``z`` and ``zp`` (z').
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping

PARAMS: tuple[str, ...] = ("eta", "kinv", "z", "zp")
_INDEX = {name: i for i, name in enumerate(PARAMS)}
_ZERO_EXP = (0,) * len(PARAMS)

# parameters that carry a deformation (used for semiclassical truncation)
DEFORMATION_PARAMS: tuple[str, ...] = ("kinv", "z", "zp")


def _coerce_coeff(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, Rational)):
        return Fraction(c)
    raise TypeError(f"ParamPoly coefficients must be exact rationals, got {c!r}")


class ParamPoly:
    """Sparse polynomial: map from exponent tuple (over PARAMS) to nonzero Fraction."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[tuple[int, ...], object] | None = None):
        clean: dict[tuple[int, ...], Fraction] = {}
        if terms:
            for exp, c in terms.items():
                if len(exp) != len(PARAMS) or any(e < 0 for e in exp):
                    raise ValueError(f"bad exponent {exp}")
                c = _coerce_coeff(c)
                if c:
                    clean[tuple(exp)] = clean.get(tuple(exp), Fraction(0)) + c
                    if not clean[tuple(exp)]:
                        del clean[tuple(exp)]
        self._terms = clean
        self._hash = None

    # constructors
    @classmethod
    def const(cls, c) -> "ParamPoly":
        return cls({_ZERO_EXP: c})

    @classmethod
    def param(cls, name: str) -> "ParamPoly":
        if name not in _INDEX:
            raise KeyError(f"unknown parameter {name!r}; declared: {PARAMS}")
        exp = [0] * len(PARAMS)
        exp[_INDEX[name]] = 1
        return cls({tuple(exp): 1})

    @classmethod
    def coerce(cls, x) -> "ParamPoly":
        if isinstance(x, ParamPoly):
            return x
        return cls.const(x)

    @property
    def terms(self) -> dict[tuple[int, ...], Fraction]:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_constant(self) -> bool:
        return all(e == _ZERO_EXP for e in self._terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return self._terms.get(_ZERO_EXP, Fraction(0))

    # arithmetic
    def __add__(self, other) -> "ParamPoly":
        other = ParamPoly.coerce(other)
        out = dict(self._terms)
        for e, c in other._terms.items():
            out[e] = out.get(e, Fraction(0)) + c
        return ParamPoly(out)

    __radd__ = __add__

    def __neg__(self) -> "ParamPoly":
        return ParamPoly({e: -c for e, c in self._terms.items()})

    def __sub__(self, other) -> "ParamPoly":
        return self + (-ParamPoly.coerce(other))

    def __rsub__(self, other) -> "ParamPoly":
        return ParamPoly.coerce(other) - self

    def __mul__(self, other) -> "ParamPoly":
        if not isinstance(other, ParamPoly):
            c = _coerce_coeff(other)
            return ParamPoly({e: v * c for e, v in self._terms.items()})
        out: dict[tuple[int, ...], Fraction] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, Fraction(0)) + c1 * c2
        return ParamPoly(out)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "ParamPoly":
        c = _coerce_coeff(other)
        if not c:
            raise ZeroDivisionError("division of ParamPoly by zero")
        return self * (1 / c)

    def __pow__(self, n: int) -> "ParamPoly":
        if not isinstance(n, int) or n < 0:
            raise ValueError("ParamPoly powers must be non-negative integers")
        out = ParamPoly.const(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other) -> bool:
        if isinstance(other, ParamPoly):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self._terms == ParamPoly.const(other)._terms
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # structure
    def degree_in(self, names: Iterable[str]) -> int:
        idx = [_INDEX[n] for n in names]
        if not self._terms:
            return -1
        return max(sum(e[i] for i in idx) for e in self._terms)

    def part_of_degree(self, names: Iterable[str], d: int) -> "ParamPoly":
        """Terms whose total degree in ``names`` equals ``d``."""
        idx = [_INDEX[n] for n in names]
        return ParamPoly({e: c for e, c in self._terms.items() if sum(e[i] for i in idx) == d})

    def subs(self, values: Mapping[str, object]) -> "ParamPoly":
        """Substitute exact values (rationals or ParamPolys) for some parameters."""
        out = ParamPoly()
        for e, c in self._terms.items():
            term = ParamPoly.const(c)
            rest = list(e)
            for name, v in values.items():
                i = _INDEX[name]
                if rest[i]:
                    term = term * (ParamPoly.coerce(v) ** rest[i])
                    rest[i] = 0
            out = out + term * ParamPoly({tuple(rest): 1})
        return out

    def evaluate(self, values: Mapping[str, complex | float]) -> complex | float:
        total = 0
        for e, c in self._terms.items():
            v = float(c)
            for i, k in enumerate(e):
                if k:
                    name = PARAMS[i]
                    if name not in values:
                        raise KeyError(f"parameter {name!r} not assigned")
                    v = v * values[name] ** k
            total = total + v
        return total

    def variables(self) -> set[str]:
        return {PARAMS[i] for e in self._terms for i, k in enumerate(e) if k}

    def __repr__(self) -> str:
        return f"ParamPoly({self})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for e in sorted(self._terms, reverse=True):
            c = self._terms[e]
            mono = "*".join(
                PARAMS[i] if k == 1 else f"{PARAMS[i]}**{k}" for i, k in enumerate(e) if k
            )
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


ZERO = ParamPoly()
ONE = ParamPoly.const(1)


def lam() -> ParamPoly:
    """The cosmological constant as the derived quantity -eta**2."""
    return -(ParamPoly.param("eta") ** 2)

