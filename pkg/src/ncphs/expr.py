"""Expression trees for closed-form coordinate functions.

Trees are immutable and compared structurally.  They can be printed to and
parsed from a Python-like infix grammar (see ``docs/grammar.md``), differentiated
exactly, and evaluated in double precision (real or complex, scalar or
vectorised over numpy arrays).

Equality of two expressions is never decided symbolically: ``equiv_random``
evaluates both sides on a seeded random sample instead.
"""
from __future__ import annotations

import ast
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import ExprError, SamplingError, SingularityError

Number = Union[Fraction, float]

SINGULAR_EPS = 1e-13
_SERIES_CUTOFF = 1e-6

FUNCTIONS = ("sin", "cos", "sinh", "cosh", "tanh", "sqrt", "exp")
# f(a*x)/a with removable singularity at a = 0 (limit value x)
SINC_LIKE = ("sinhc", "tanhc", "sinc")


class Expr:
    """Base class for expression nodes."""

    __slots__ = ()

    def __add__(self, other):
        return add(self, to_expr(other))

    def __radd__(self, other):
        return add(to_expr(other), self)

    def __sub__(self, other):
        return sub(self, to_expr(other))

    def __rsub__(self, other):
        return sub(to_expr(other), self)

    def __mul__(self, other):
        return mul(self, to_expr(other))

    def __rmul__(self, other):
        return mul(to_expr(other), self)

    def __truediv__(self, other):
        return div(self, to_expr(other))

    def __rtruediv__(self, other):
        return div(to_expr(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, n):
        return power(self, n)

    def __str__(self):
        return to_string(self)


@dataclass(frozen=True, eq=True, repr=True)
class Const(Expr):
    value: Number


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Add(Expr):
    terms: tuple


@dataclass(frozen=True)
class Mul(Expr):
    factors: tuple


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class Div(Expr):
    num: Expr
    den: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exp: int


@dataclass(frozen=True)
class Func(Expr):
    name: str
    arg: Expr


@dataclass(frozen=True)
class SincLike(Expr):
    """``name(a, x) = f(a*x)/a`` for f in sinh/tanh/sin, equal to ``x`` at ``a = 0``."""

    name: str
    scale: Expr
    arg: Expr


ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))


def to_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, bool):
        raise ExprError("booleans are not expressions")
    if isinstance(x, int):
        return Const(Fraction(x))
    if isinstance(x, (Fraction, float)):
        return Const(x)
    if isinstance(x, str):
        return Var(x)
    raise ExprError(f"cannot convert {x!r} to an expression")


def var(name: str) -> Var:
    return Var(name)


def _is_const(e: Expr, value=None) -> bool:
    return isinstance(e, Const) and (value is None or e.value == value)


# ---------------------------------------------------------------------------
# smart constructors (flattening plus constant folding only)

def add(*terms: Expr) -> Expr:
    flat: list[Expr] = []
    const: Number = Fraction(0)
    for t in terms:
        t = to_expr(t)
        parts = t.terms if isinstance(t, Add) else (t,)
        for p in parts:
            if isinstance(p, Const):
                const = const + p.value
            else:
                flat.append(p)
    if const != 0:
        flat.append(Const(const))
    if not flat:
        return ZERO
    if len(flat) == 1:
        return flat[0]
    return Add(tuple(flat))


def neg(e: Expr) -> Expr:
    e = to_expr(e)
    if isinstance(e, Const):
        return Const(-e.value)
    if isinstance(e, Neg):
        return e.arg
    if isinstance(e, Mul):
        return mul(Const(Fraction(-1)), e)
    return Neg(e)


def sub(a: Expr, b: Expr) -> Expr:
    return add(a, neg(b))


def mul(*factors: Expr) -> Expr:
    flat: list[Expr] = []
    const: Number = Fraction(1)
    sign = 1
    for f in factors:
        f = to_expr(f)
        if isinstance(f, Neg):
            sign = -sign
            f = f.arg
        parts = f.factors if isinstance(f, Mul) else (f,)
        for p in parts:
            if isinstance(p, Neg):
                sign = -sign
                p = p.arg
            if isinstance(p, Const):
                const = const * p.value
            else:
                flat.append(p)
    const = const * sign
    if const == 0:
        return ZERO
    if not flat:
        return Const(const)
    body = flat[0] if len(flat) == 1 else Mul(tuple(flat))
    if const == 1:
        return body
    if const == -1:
        return Neg(body)
    return Mul((Const(const),) + tuple(flat))


def div(a: Expr, b: Expr) -> Expr:
    a, b = to_expr(a), to_expr(b)
    if _is_const(b, 0):
        raise SingularityError("division by the constant zero")
    if _is_const(a, 0):
        return ZERO
    if _is_const(b, 1):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value / b.value)
    return Div(a, b)


def power(b: Expr, n: int) -> Expr:
    if not isinstance(n, int):
        raise ExprError("only integer powers are supported")
    b = to_expr(b)
    if n == 0:
        return ONE
    if n == 1:
        return b
    if isinstance(b, Const):
        return Const(b.value ** n)
    return Pow(b, n)


def func(name: str, arg: Expr) -> Expr:
    if name not in FUNCTIONS:
        raise ExprError(f"unknown function {name!r}")
    return Func(name, to_expr(arg))


def sinc_like(name: str, scale: Expr, arg: Expr) -> Expr:
    if name not in SINC_LIKE:
        raise ExprError(f"unknown sinc-like function {name!r}")
    return SincLike(name, to_expr(scale), to_expr(arg))


def sin(a):
    return func("sin", a)


def cos(a):
    return func("cos", a)


def sinh(a):
    return func("sinh", a)


def cosh(a):
    return func("cosh", a)


def tanh(a):
    return func("tanh", a)


def sqrt(a):
    return func("sqrt", a)


def exp(a):
    return func("exp", a)


# ---------------------------------------------------------------------------
# structure queries

def children(e: Expr) -> tuple:
    if isinstance(e, Add):
        return e.terms
    if isinstance(e, Mul):
        return e.factors
    if isinstance(e, (Neg, Func)):
        return (e.arg,)
    if isinstance(e, Div):
        return (e.num, e.den)
    if isinstance(e, Pow):
        return (e.base,)
    if isinstance(e, SincLike):
        return (e.scale, e.arg)
    return ()


def free_vars(e: Expr) -> frozenset[str]:
    out: set[str] = set()
    stack = [e]
    while stack:
        n = stack.pop()
        if isinstance(n, Var):
            out.add(n.name)
        else:
            stack.extend(children(n))
    return frozenset(out)


def denominators(e: Expr) -> list[Expr]:
    """Every subexpression that appears as a divisor (including negative powers)."""
    out: list[Expr] = []
    stack = [e]
    while stack:
        n = stack.pop()
        if isinstance(n, Div):
            out.append(n.den)
        elif isinstance(n, Pow) and n.exp < 0:
            out.append(n.base)
        stack.extend(children(n))
    return out


def substitute(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    """Replace variables by expressions (structural, with folding)."""
    if isinstance(e, Var):
        return to_expr(mapping[e.name]) if e.name in mapping else e
    if isinstance(e, Const):
        return e
    if isinstance(e, Add):
        return add(*(substitute(t, mapping) for t in e.terms))
    if isinstance(e, Mul):
        return mul(*(substitute(f, mapping) for f in e.factors))
    if isinstance(e, Neg):
        return neg(substitute(e.arg, mapping))
    if isinstance(e, Div):
        return div(substitute(e.num, mapping), substitute(e.den, mapping))
    if isinstance(e, Pow):
        return power(substitute(e.base, mapping), e.exp)
    if isinstance(e, Func):
        return Func(e.name, substitute(e.arg, mapping))
    if isinstance(e, SincLike):
        return SincLike(e.name, substitute(e.scale, mapping), substitute(e.arg, mapping))
    raise ExprError(f"unknown node {e!r}")


# ---------------------------------------------------------------------------
# differentiation

def diff(e: Expr, v: str, declared: Iterable[str] | None = None) -> Expr:
    """Exact partial derivative of ``e`` with respect to variable ``v``.

    If ``declared`` is given, ``v`` must be one of the declared variables.
    """
    if declared is not None and v not in set(declared):
        raise ExprError(f"variable {v!r} is not declared")
    return _diff(e, v, {})


def _diff(e: Expr, v: str, memo: dict) -> Expr:
    key = id(e)
    hit = memo.get(key)
    if hit is not None and hit[0] is e:
        return hit[1]
    out = _diff_node(e, v, memo)
    memo[key] = (e, out)
    return out


def _diff_node(e: Expr, v: str, memo: dict) -> Expr:
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == v else ZERO
    if isinstance(e, Add):
        return add(*(_diff(t, v, memo) for t in e.terms))
    if isinstance(e, Neg):
        return neg(_diff(e.arg, v, memo))
    if isinstance(e, Mul):
        fs = e.factors
        terms = []
        for i, f in enumerate(fs):
            df = _diff(f, v, memo)
            if _is_const(df, 0):
                continue
            terms.append(mul(*fs[:i], df, *fs[i + 1:]))
        return add(*terms)
    if isinstance(e, Div):
        dn = _diff(e.num, v, memo)
        dd = _diff(e.den, v, memo)
        if _is_const(dd, 0):
            return div(dn, e.den)
        return div(sub(mul(dn, e.den), mul(e.num, dd)), power(e.den, 2))
    if isinstance(e, Pow):
        db = _diff(e.base, v, memo)
        if _is_const(db, 0):
            return ZERO
        return mul(Const(Fraction(e.exp)), power(e.base, e.exp - 1), db)
    if isinstance(e, Func):
        da = _diff(e.arg, v, memo)
        if _is_const(da, 0):
            return ZERO
        a = e.arg
        if e.name == "sin":
            outer = cos(a)
        elif e.name == "cos":
            outer = neg(sin(a))
        elif e.name == "sinh":
            outer = cosh(a)
        elif e.name == "cosh":
            outer = sinh(a)
        elif e.name == "tanh":
            outer = sub(ONE, power(tanh(a), 2))
        elif e.name == "exp":
            outer = e
        elif e.name == "sqrt":
            outer = div(ONE, mul(Const(Fraction(2)), e))
        else:  # pragma: no cover - guarded by func()
            raise ExprError(e.name)
        return mul(outer, da)
    if isinstance(e, SincLike):
        a, x = e.scale, e.arg
        dx = _diff(x, v, memo)
        da = _diff(a, v, memo)
        ax = mul(a, x)
        if e.name == "sinhc":
            outer = cosh(ax)
        elif e.name == "tanhc":
            outer = sub(ONE, power(tanh(ax), 2))
        else:
            outer = cos(ax)
        terms = [mul(outer, dx)]
        if not _is_const(da, 0):
            # d/da f(a x)/a = (x f'(a x) - f(a x)/a)/a, singular at a = 0
            terms.append(mul(da, div(sub(mul(x, outer), e), a)))
        return add(*terms)
    raise ExprError(f"unknown node {e!r}")


# ---------------------------------------------------------------------------
# evaluation

def evaluate(e: Expr, point: Mapping[str, object], check: bool = True):
    """Evaluate with numpy semantics (scalars, arrays, real or complex).

    With ``check`` set, any denominator of magnitude below ``SINGULAR_EPS``
    raises :class:`SingularityError`.
    """
    cache: dict = {}
    with np.errstate(all="ignore"):
        return _eval(e, point, check, cache)


def _eval(e: Expr, point, check: bool, cache: dict):
    key = id(e)
    hit = cache.get(key)
    if hit is not None and hit[0] is e:
        return hit[1]
    out = _eval_node(e, point, check, cache)
    cache[key] = (e, out)
    return out


def _guard(den, check: bool, what: str):
    if check and np.any(np.abs(den) < SINGULAR_EPS):
        raise SingularityError(f"near-singular denominator in {what}")


def _eval_node(e: Expr, point, check: bool, cache: dict):
    if isinstance(e, Const):
        return float(e.value)
    if isinstance(e, Var):
        try:
            return point[e.name]
        except KeyError:
            raise ExprError(f"variable {e.name!r} is not assigned") from None
    if isinstance(e, Add):
        total = 0.0
        for t in e.terms:
            total = total + _eval(t, point, check, cache)
        return total
    if isinstance(e, Mul):
        prod = 1.0
        for f in e.factors:
            prod = prod * _eval(f, point, check, cache)
        return prod
    if isinstance(e, Neg):
        return -_eval(e.arg, point, check, cache)
    if isinstance(e, Div):
        den = _eval(e.den, point, check, cache)
        _guard(den, check, to_string(e))
        return _eval(e.num, point, check, cache) / den
    if isinstance(e, Pow):
        b = _eval(e.base, point, check, cache)
        if e.exp < 0:
            _guard(b, check, to_string(e))
            return 1.0 / b ** (-e.exp)
        return b ** e.exp
    if isinstance(e, Func):
        a = _eval(e.arg, point, check, cache)
        if e.name == "sqrt":
            return np.lib.scimath.sqrt(a)
        return getattr(np, e.name)(a)
    if isinstance(e, SincLike):
        a = _eval(e.scale, point, check, cache)
        x = _eval(e.arg, point, check, cache)
        return _sinc_like(e.name, a, x)
    raise ExprError(f"unknown node {e!r}")


def _sinc_like(name: str, a, x):
    u = a * x
    small = np.abs(u) < _SERIES_CUTOFF
    a_safe = np.where(small, 1.0, a)
    u2 = u * u
    if name == "sinhc":
        full, series = np.sinh(u) / a_safe, x * (1 + u2 / 6)
    elif name == "tanhc":
        full, series = np.tanh(u) / a_safe, x * (1 - u2 / 3)
    else:
        full, series = np.sin(u) / a_safe, x * (1 - u2 / 6)
    out = np.where(small, series, full)
    return out[()] if np.ndim(out) == 0 else out


def expr_eval(e: Expr, point: Mapping[str, float]) -> float:
    """Scalar real evaluation; raises on unassigned variables or singular denominators."""
    val = evaluate(e, point)
    if np.ndim(val) != 0:
        raise ExprError("expr_eval expects a scalar point")
    val = complex(val)
    if abs(val.imag) > 1e-12 * max(1.0, abs(val.real)):
        raise ExprError(f"expression is not real at {dict(point)}: {val}")
    return val.real


# ---------------------------------------------------------------------------
# printing

_ATOMIC = (Var, Func, SincLike)


def _const_str(c: Number) -> str:
    if isinstance(c, float):
        s = repr(c)
        return f"({s})" if c < 0 else s
    c = Fraction(c)
    if c.denominator == 1:
        return f"({c.numerator})" if c < 0 else str(c.numerator)
    return f"({c.numerator}/{c.denominator})"


def _wrap(s: str) -> str:
    return f"({s})"


def to_string(e: Expr) -> str:
    """Canonical infix form; ``parse(to_string(e)) == e`` for parsed trees."""
    if isinstance(e, Const):
        return _const_str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Func):
        return f"{e.name}({to_string(e.arg)})"
    if isinstance(e, SincLike):
        return f"{e.name}({to_string(e.scale)}, {to_string(e.arg)})"
    if isinstance(e, Add):
        out = _add_term(e.terms[0], first=True)
        for t in e.terms[1:]:
            flipped = _negated_leading_const(t)
            if flipped is not None:
                out += " - " + _add_term(flipped, first=False)
            elif isinstance(t, Neg):
                inner = t.arg
                s = to_string(inner)
                out += " - " + (_wrap(s) if isinstance(inner, Add) else s)
            else:
                out += " + " + _add_term(t, first=False)
        return out
    if isinstance(e, Neg):
        a = e.arg
        s = to_string(a)
        if isinstance(a, (Add, Mul, Div, Neg)) or (isinstance(a, Const) and a.value < 0):
            return "-" + _wrap(s)
        return "-" + s
    if isinstance(e, Mul):
        parts = []
        for i, f in enumerate(e.factors):
            s = to_string(f)
            if i == 0 and isinstance(f, Const) and f.value < 0 and _plain_number(f.value):
                s = s[1:-1]
            elif isinstance(f, (Add, Div)):
                s = _wrap(s)
            elif isinstance(f, Neg) and i > 0:
                s = _wrap(s)
            elif isinstance(f, Mul):
                s = _wrap(s)
            parts.append(s)
        return "*".join(parts)
    if isinstance(e, Div):
        n, d = e.num, e.den
        ns = to_string(n)
        if isinstance(n, (Add, Neg)):
            ns = _wrap(ns)
        ds = to_string(d)
        if isinstance(d, (Add, Mul, Div, Neg)):
            ds = _wrap(ds)
        return f"{ns}/{ds}"
    if isinstance(e, Pow):
        b = e.base
        bs = to_string(b)
        if isinstance(b, (Add, Mul, Div, Neg, Pow)):
            bs = _wrap(bs)
        xs = str(e.exp) if e.exp >= 0 else f"({e.exp})"
        return f"{bs}**{xs}"
    raise ExprError(f"unknown node {e!r}")


def _plain_number(v: Number) -> bool:
    return isinstance(v, float) or Fraction(v).denominator == 1


def _negated_leading_const(t: Expr):
    """``t`` with its sign absorbed, when it prints naturally after a minus sign."""
    if isinstance(t, Const) and t.value < 0:
        return Const(-t.value)
    if (isinstance(t, Mul) and isinstance(t.factors[0], Const) and t.factors[0].value < 0
            and _plain_number(t.factors[0].value)):
        return Mul((Const(-t.factors[0].value),) + t.factors[1:])
    return None


def _add_term(t: Expr, first: bool) -> str:
    s = to_string(t)
    if isinstance(t, Add):
        return _wrap(s)
    if isinstance(t, Neg) and not first:
        return _wrap(s)
    return s


# ---------------------------------------------------------------------------
# parsing

def parse(text: str) -> Expr:
    """Parse the infix grammar into a tree (flattened sums/products, folded numerals)."""
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ExprError(f"cannot parse {text!r}: {exc.msg}") from None
    return _from_ast(tree.body, text)


def _from_ast(node, text: str) -> Expr:
    if isinstance(node, ast.Constant):
        v = node.value
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ExprError(f"unsupported literal {v!r} in {text!r}")
        return Const(Fraction(v)) if isinstance(v, int) else Const(float(v))
    if isinstance(node, ast.Name):
        return Var(node.id)
    if isinstance(node, ast.UnaryOp):
        inner = _from_ast(node.operand, text)
        if isinstance(node.op, ast.UAdd):
            return inner
        if isinstance(node.op, ast.USub):
            if isinstance(inner, Const):
                return Const(-inner.value)
            return Neg(inner)
        raise ExprError(f"unsupported unary operator in {text!r}")
    if isinstance(node, ast.BinOp):
        left = _from_ast(node.left, text)
        if isinstance(node.op, ast.Pow):
            n = _from_ast(node.right, text)
            if not (isinstance(n, Const) and isinstance(n.value, Fraction) and n.value.denominator == 1):
                raise ExprError(f"exponents must be integers in {text!r}")
            return Pow(left, int(n.value))
        right = _from_ast(node.right, text)
        if isinstance(node.op, ast.Add):
            return _raw_add(left, right)
        if isinstance(node.op, ast.Sub):
            if isinstance(right, Const):
                r = Const(-right.value)
            elif (isinstance(right, Mul) and isinstance(right.factors[0], Const)
                  and _plain_number(right.factors[0].value)):
                r = Mul((Const(-right.factors[0].value),) + right.factors[1:])
            else:
                r = Neg(right)
            return _raw_add(left, r)
        if isinstance(node.op, ast.Mult):
            lf = left.factors if isinstance(left, Mul) else (left,)
            rf = right.factors if isinstance(right, Mul) else (right,)
            return Mul(lf + rf)
        if isinstance(node.op, ast.Div):
            if (isinstance(left, Const) and isinstance(right, Const)
                    and isinstance(left.value, Fraction) and isinstance(right.value, Fraction)):
                if right.value == 0:
                    raise ExprError(f"division by zero in {text!r}")
                return Const(left.value / right.value)
            return Div(left, right)
        raise ExprError(f"unsupported operator in {text!r}")
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.keywords:
            raise ExprError(f"unsupported call in {text!r}")
        name = node.func.id
        args = [_from_ast(a, text) for a in node.args]
        if name in FUNCTIONS:
            if len(args) != 1:
                raise ExprError(f"{name} takes one argument")
            return Func(name, args[0])
        if name in SINC_LIKE:
            if len(args) != 2:
                raise ExprError(f"{name} takes two arguments (scale, argument)")
            return SincLike(name, args[0], args[1])
        raise ExprError(f"unknown function {name!r} in {text!r}")
    raise ExprError(f"unsupported syntax in {text!r}")


def _raw_add(left: Expr, right: Expr) -> Expr:
    lt = left.terms if isinstance(left, Add) else (left,)
    rt = right.terms if isinstance(right, Add) else (right,)
    return Add(lt + rt)


# ---------------------------------------------------------------------------
# randomized equivalence

@dataclass(frozen=True)
class SamplePlan:
    """Where and how densely to sample when comparing expressions numerically.

    Variables without an explicit range are drawn from ``default_range``;
    ``fixed`` pins parameters (eta, kappa, ...) to given values.  A candidate
    point is rejected when any denominator has magnitude below ``exclusion``.
    """

    ranges: Mapping[str, tuple[float, float]] = field(default_factory=dict)
    exclusion: float = 0.05
    n_points: int = 100
    seed: int = 0
    fixed: Mapping[str, object] = field(default_factory=dict)
    default_range: tuple[float, float] = (-0.7, 0.7)

    def __post_init__(self):
        if self.n_points < 1:
            raise SamplingError("a sample plan needs at least one point")
        for name, (lo, hi) in list(self.ranges.items()) + [("<default>", self.default_range)]:
            if not hi > lo:
                raise SamplingError(f"degenerate range for {name}: [{lo}, {hi}]")

    def with_(self, **changes) -> "SamplePlan":
        data = {f: getattr(self, f) for f in self.__dataclass_fields__}
        data.update(changes)
        return SamplePlan(**data)


def sample_points(plan: SamplePlan, variables: Iterable[str],
                  guards: Sequence[Expr] = ()) -> dict[str, np.ndarray]:
    """Draw ``plan.n_points`` admissible points as a dict of arrays.

    Fixed values are broadcast.  Raises :class:`SamplingError` when every
    candidate is excluded.
    """
    names = sorted(set(variables) - set(plan.fixed))
    # a guard free of sampled variables is a property of the fixed values, not a locus to avoid
    sampled = [g for g in guards if free_vars(g) & set(names)]
    rng = np.random.default_rng(plan.seed)
    accepted: dict[str, list] = {n: [] for n in names}
    count = 0
    for _ in range(50):
        m = max(2 * (plan.n_points - count), 16)
        cand = {}
        for n in names:
            lo, hi = plan.ranges.get(n, plan.default_range)
            cand[n] = rng.uniform(lo, hi, m)
        point = dict(cand)
        for k, v in plan.fixed.items():
            point[k] = np.full(m, v, dtype=complex if isinstance(v, complex) else float)
        ok = np.ones(m, dtype=bool)
        for g in guards:
            val = evaluate(g, point, check=False)
            ok &= np.isfinite(val)
            if g in sampled:
                ok &= np.abs(val) >= plan.exclusion
        idx = np.flatnonzero(ok)[: plan.n_points - count]
        for n in names:
            accepted[n].extend(cand[n][idx])
        count += len(idx)
        if count >= plan.n_points:
            break
    if count == 0:
        raise SamplingError("every sampled point was excluded by the singularity filter")
    out = {n: np.asarray(v) for n, v in accepted.items()}
    for k, v in plan.fixed.items():
        out[k] = np.full(count, v, dtype=complex if isinstance(v, complex) else float)
    return out


@dataclass(frozen=True)
class EquivReport:
    equivalent: bool
    max_deviation: float
    max_scaled_deviation: float
    worst_point: dict
    n_points: int
    seed: int


def deviation(a_val, b_val) -> tuple[np.ndarray, np.ndarray]:
    """Absolute deviation and deviation scaled by ``1 + max(|a|, |b|)``."""
    d = np.abs(np.asarray(a_val) - np.asarray(b_val))
    scale = 1.0 + np.maximum(np.abs(a_val), np.abs(b_val))
    return d, d / scale


def equiv_random(a: Expr, b: Expr, plan: SamplePlan, tol: float = 1e-9,
                 abs_floor: float = 1e-12) -> EquivReport:
    """Randomized equality oracle.

    The verdict holds iff ``|a - b| <= max(tol * (1 + max(|a|, |b|)), abs_floor)``
    at every sampled point.  Points where a denominator of either side is
    small are skipped per the plan.
    """
    variables = free_vars(a) | free_vars(b)
    pts = sample_points(plan, variables, denominators(a) + denominators(b))
    n = len(next(iter(pts.values()))) if pts else plan.n_points
    av = np.broadcast_to(evaluate(a, pts), (n,))
    bv = np.broadcast_to(evaluate(b, pts), (n,))
    d, scaled = deviation(av, bv)
    bound = np.maximum(tol * (1.0 + np.maximum(np.abs(av), np.abs(bv))), abs_floor)
    worst = int(np.argmax(scaled)) if n else 0
    return EquivReport(
        equivalent=bool(np.all(d <= bound)),
        max_deviation=float(d.max()) if n else 0.0,
        max_scaled_deviation=float(scaled.max()) if n else 0.0,
        worst_point={k: _scalar(v[worst]) for k, v in pts.items()},
        n_points=n,
        seed=plan.seed,
    )


def _scalar(v):
    v = v.item() if hasattr(v, "item") else v
    return v
