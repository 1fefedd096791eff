"""Noncommutative polynomial algebras with exact coefficients.

An algebra is a list of generators in a fixed order plus, for every pair
out of order, a rewrite rule ``b a -> a b + [b, a]``.  Normal forms are
ordered monomials (``a <= b <= ...`` in generator order).

Reducing a word may lead back to the same word (the quadratic kappa-(A)dS
algebra does this in its natural order), so a normal form is obtained by
solving the finite linear system made of one reduction step per reachable
word, with coefficients in the rational function field Q(eta, kinv, z, zp).
"""
from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from sympy import QQ
from sympy.polys.fields import field as frac_field

from . import expr as E
from .errors import RewriteError
from .params import DEFORMATION_PARAMS, PARAMS, ParamPoly
from .polyexpr import to_word_poly, word_poly_to_expr
from .results import CheckResult

Word = tuple

COEFFS, *_GENS = frac_field(",".join(PARAMS), QQ)
_MAX_WORDS = 20000


def coeff(x):
    """Coerce int, Fraction, ParamPoly or field element into the coefficient field."""
    if isinstance(x, ParamPoly):
        out = COEFFS.zero
        for exps, c in x.terms.items():
            term = COEFFS(QQ(c.numerator, c.denominator))
            for g, k in zip(_GENS, exps):
                if k:
                    term = term * g ** k
            out = out + term
        return out
    if isinstance(x, Fraction):
        return COEFFS(QQ(x.numerator, x.denominator))
    if isinstance(x, int):
        return COEFFS(x)
    if getattr(x, "field", None) == COEFFS:
        return x
    raise TypeError(f"cannot use {x!r} as a coefficient")


def to_param_poly(c) -> ParamPoly:
    """Back to an exact polynomial; fails for a genuine rational function."""
    if c.denom != 1:
        if c.denom.is_ground:
            num = c.numer * (1 / QQ.convert(c.denom.LC))
        else:
            raise RewriteError(f"coefficient {c} is not a polynomial")
    else:
        num = c.numer
    out = ParamPoly()
    for exps, q in num.terms():
        out = out + ParamPoly({tuple(exps): Fraction(int(q.numerator), int(q.denominator))})
    return out


class NCPoly:
    """Finite sum of coefficient * word; zero coefficients are never stored."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Word, object] | None = None):
        clean = {}
        for w, c in (terms or {}).items():
            c = coeff(c)
            if c:
                clean[tuple(w)] = _canon(c)
        self.terms = clean

    @classmethod
    def word(cls, *gens: str, coeff=1) -> "NCPoly":
        return cls({tuple(gens): coeff})

    @classmethod
    def scalar(cls, c) -> "NCPoly":
        return cls({(): c})

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((len(w) for w in self.terms), default=0)

    def __add__(self, other: "NCPoly") -> "NCPoly":
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = _add(out[w], c) if w in out else c
        return NCPoly(out)

    def __neg__(self) -> "NCPoly":
        return NCPoly({w: -c for w, c in self.terms.items()})

    def __sub__(self, other: "NCPoly") -> "NCPoly":
        return self + (-other)

    def __mul__(self, other) -> "NCPoly":
        """Concatenation product (not normal ordered); scalars act on coefficients."""
        if not isinstance(other, NCPoly):
            k = coeff(other)
            return NCPoly({w: _mul(c, k) for w, c in self.terms.items()})
        out: dict = {}
        for wa, ca in self.terms.items():
            for wb, cb in other.terms.items():
                w = wa + wb
                out[w] = _add(out[w], _mul(ca, cb)) if w in out else _mul(ca, cb)
        return NCPoly(out)

    def __rmul__(self, other) -> "NCPoly":
        return self * other

    def __eq__(self, other) -> bool:
        return isinstance(other, NCPoly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self) -> str:
        return f"NCPoly({self})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for w, c in sorted(self.terms.items()):
            mono = "*".join(w) if w else "1"
            parts.append(f"({c})*{mono}")
        return " + ".join(parts)


def _tarjan(nodes: list, succ: Mapping) -> list[list]:
    """Strongly connected components, each listed after every component it points to."""
    index, low, on, stack, out = {}, {}, set(), [], []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on.add(w)
                    work.append((w, iter(succ[w])))
                    advanced = True
                    break
                if w in on:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)
    return out


# Arithmetic below skips the gcd cancellation sympy performs on every
# operation; values are reduced once, when a normal form is stored or returned.

def _mul(a, b):
    return COEFFS.raw_new(a.numer * b.numer, a.denom * b.denom)


def _add(a, b):
    if a.denom == b.denom:
        return COEFFS.raw_new(a.numer + b.numer, a.denom)
    return COEFFS.raw_new(a.numer * b.denom + b.numer * a.denom, a.denom * b.denom)


def _inv(a):
    return COEFFS.raw_new(a.denom, a.numer)


def _canon(a):
    if a.denom.is_one:
        return a
    return COEFFS.new(a.numer, a.denom)


def _axpy(acc: dict, scale, vec: Mapping) -> None:
    for w, c in vec.items():
        v = _mul(scale, c)
        if w in acc:
            v = _add(acc[w], v)
        if not v:
            acc.pop(w, None)
        else:
            acc[w] = v


@dataclass
class NCAlgebra:
    name: str
    generators: tuple[str, ...]
    rules: dict  # (b, a) with b after a -> NCPoly equal to [b, a] = b a - a b
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self._rank = {g: i for i, g in enumerate(self.generators)}
        if len(self._rank) != len(self.generators):
            raise RewriteError(f"{self.name}: repeated generator")

    @classmethod
    def from_relations(cls, name: str, generators: Sequence[str],
                       relations: Mapping[tuple[str, str], NCPoly], normalize: bool = True) -> "NCAlgebra":
        """Build from commutators ``[a, b] = rhs``; either orientation may be given."""
        gens = tuple(generators)
        rank = {g: i for i, g in enumerate(gens)}
        rules = {}
        for (a, b), rhs in relations.items():
            if a not in rank or b not in rank or a == b:
                raise RewriteError(f"{name}: bad relation key ({a}, {b})")
            key, val = ((a, b), rhs) if rank[a] > rank[b] else ((b, a), -rhs)
            if key in rules:
                raise RewriteError(f"{name}: relation ({a}, {b}) given twice")
            rules[key] = val
        alg = cls(name, gens, rules)
        if normalize:
            alg.rules = {k: alg.normal_form(v) for k, v in rules.items()}
            alg._cache.clear()
        return alg

    @classmethod
    def from_catalog(cls, entry, order: Sequence[str] | None = None) -> "NCAlgebra":
        gens = tuple(order or entry.ordering or entry.coordinates)
        rel = {}
        for (a, b), rhs in entry.table.items():
            rel[(a, b)] = NCPoly(to_word_poly(rhs, gens))
        return cls.from_relations(entry.name, gens, rel)

    def with_rule(self, a: str, b: str, rhs: NCPoly) -> "NCAlgebra":
        """Copy with [a, b] replaced (used for mutation tests)."""
        rules = dict(self.rules)
        key, val = ((a, b), rhs) if self._rank[a] > self._rank[b] else ((b, a), -rhs)
        rules[key] = val
        return NCAlgebra(self.name + "*", self.generators, rules)

    def gen(self, g: str) -> NCPoly:
        if g not in self._rank:
            raise RewriteError(f"{self.name}: unknown generator {g!r}")
        return NCPoly.word(g)

    def parse(self, text: str) -> NCPoly:
        return NCPoly(to_word_poly(E.parse(text), self.generators))

    def from_expr(self, e: E.Expr) -> NCPoly:
        return NCPoly(to_word_poly(e, self.generators))

    def inversions(self, w: Word) -> list[int]:
        r = self._rank
        return [i for i in range(len(w) - 1) if r[w[i]] > r[w[i + 1]]]

    def is_normal(self, p: NCPoly) -> bool:
        return all(not self.inversions(w) for w in p.terms)

    def step_bound(self, degree: int) -> int:
        return max(degree, 1) * len(self.generators) * 10

    def _step(self, w: Word, i: int) -> dict:
        b, a = w[i], w[i + 1]
        pre, post = w[:i], w[i + 2:]
        out = {pre + (a, b) + post: COEFFS.one}
        rule = self.rules.get((b, a))
        if rule is not None:
            _axpy(out, COEFFS.one, {pre + u + post: c for u, c in rule.terms.items()})
        return out

    def normal_form(self, p: NCPoly | Word, strategy: str = "leftmost", seed: int | None = None) -> NCPoly:
        """Rewrite to ordered monomials.

        ``strategy`` picks which inversion each word is reduced at: always
        the leftmost or always the rightmost one, or (``"random"``) a seeded
        random inversion for the first step of each input word followed by
        leftmost reduction.  Agreement of these is the confluence check.  A word
        more than ``step_bound`` reductions away from the input raises
        :class:`RewriteError`, as does a singular reduction system.
        """
        if not isinstance(p, NCPoly):
            p = NCPoly.word(*p)
        for w in p.terms:
            for g in w:
                if g not in self._rank:
                    raise RewriteError(f"{self.name}: unknown generator {g!r}")
        if strategy not in ("leftmost", "rightmost", "random"):
            raise ValueError(f"unknown strategy {strategy!r}")
        if strategy == "random":
            return self._random_first_step(p, seed)
        cache = self._cache.setdefault(strategy, {})
        bound = self.step_bound(p.degree())

        eqs: dict = {}
        depth = {w: 0 for w in p.terms if w not in cache and self.inversions(w)}
        queue = deque(depth)
        while queue:
            u = queue.popleft()
            if u in eqs:
                continue
            if depth[u] > bound:
                raise RewriteError(f"{self.name}: rewriting exceeded {bound} steps (word {'*'.join(u)})")
            inv = self.inversions(u)
            i = inv[0] if strategy == "leftmost" else inv[-1]
            eqs[u] = self._step(u, i)
            if len(eqs) > _MAX_WORDS:
                raise RewriteError(f"{self.name}: rewriting reached more than {_MAX_WORDS} words")
            for v in eqs[u]:
                if v not in depth and v not in cache and self.inversions(v):
                    depth[v] = depth[u] + 1
                    queue.append(v)

        unknown = list(eqs)
        succ = {u: [v for v in eqs[u] if v in eqs] for u in unknown}
        for comp in _tarjan(unknown, succ):
            self._solve_component(comp, eqs, cache)

        out: dict = {}
        for w, c in p.terms.items():
            if w in cache:
                _axpy(out, c, cache[w])
            elif w in eqs:
                raise RewriteError("internal: unsolved word")
            else:
                _axpy(out, c, {w: COEFFS.one})
        return NCPoly(out)

    def _random_first_step(self, p: NCPoly, seed: int | None) -> NCPoly:
        rng = random.Random(seed)
        out = NCPoly()
        for w, c in sorted(p.terms.items()):
            inv = self.inversions(w)
            if not inv:
                out = out + NCPoly({w: c})
                continue
            step = NCPoly(self._step(w, rng.choice(inv)))
            out = out + self.normal_form(step) * c
        return out

    def _known(self, v: Word, cache: dict):
        if v in cache:
            return cache[v]
        return {v: COEFFS.one}

    def _solve_component(self, comp: list, eqs: dict, cache: dict) -> None:
        members = set(comp)
        if len(comp) == 1 and comp[0] not in eqs[comp[0]]:
            u = comp[0]
            acc: dict = {}
            for v, c in eqs[u].items():
                _axpy(acc, c, self._known(v, cache))
            cache[u] = {w: _canon(c) for w, c in acc.items()}
            return
        # u - sum_{v in comp} a_uv v = sum_{v outside} a_uv NF(v); Gaussian elimination over the field
        idx = {u: k for k, u in enumerate(comp)}
        n = len(comp)
        mat = [[COEFFS.zero] * n for _ in range(n)]
        rhs: list = [dict() for _ in range(n)]
        for u in comp:
            r = idx[u]
            mat[r][r] = _add(mat[r][r], COEFFS.one)
            for v, c in eqs[u].items():
                if v in members:
                    mat[r][idx[v]] = _add(mat[r][idx[v]], -c)
                else:
                    _axpy(rhs[r], c, self._known(v, cache))
        for col in range(n):
            piv = next((r for r in range(col, n) if mat[r][col]), None)
            if piv is None:
                raise RewriteError(f"{self.name}: reduction system is singular")
            mat[col], mat[piv] = mat[piv], mat[col]
            rhs[col], rhs[piv] = rhs[piv], rhs[col]
            inv = _inv(mat[col][col])
            mat[col] = [_canon(_mul(x, inv)) for x in mat[col]]
            rhs[col] = {w: _mul(c, inv) for w, c in rhs[col].items()}
            for r in range(n):
                if r != col and mat[r][col]:
                    f = mat[r][col]
                    mat[r] = [_canon(_add(x, _mul(-f, y))) for x, y in zip(mat[r], mat[col])]
                    _axpy(rhs[r], -f, rhs[col])
        for u in comp:
            cache[u] = {w: _canon(c) for w, c in rhs[idx[u]].items()}

    def product(self, *ps: NCPoly) -> NCPoly:
        out = NCPoly.scalar(1)
        for p in ps:
            out = out * p
        return self.normal_form(out)


def normal_form(A: NCAlgebra, w, strategy: str = "leftmost", seed: int | None = None) -> NCPoly:
    return A.normal_form(w, strategy, seed)


def commutator_nc(A: NCAlgebra, p: NCPoly, q: NCPoly) -> NCPoly:
    return A.normal_form(p * q - q * p)


def jacobi_nc(A: NCAlgebra) -> CheckResult:
    """Exact Jacobi identity for all generator triples."""
    g = A.generators
    for a, b, c in combinations(g, 3):
        x, y, z = A.gen(a), A.gen(b), A.gen(c)
        total = (commutator_nc(A, commutator_nc(A, x, y), z)
                 + commutator_nc(A, commutator_nc(A, y, z), x)
                 + commutator_nc(A, commutator_nc(A, z, x), y))
        if not total.is_zero():
            return CheckResult(False, {"triple": (a, b, c), "residual": str(total)}, None,
                               f"Jacobi fails on ({a}, {b}, {c})")
    return CheckResult(True, None, 0.0, f"{len(list(combinations(g, 3)))} triples")


def casimir_centrality(A: NCAlgebra, c: NCPoly) -> CheckResult:
    for g in A.generators:
        comm = commutator_nc(A, c, A.gen(g))
        if not comm.is_zero():
            return CheckResult(False, {"generator": g, "commutator": str(comm)}, None,
                               f"does not commute with {g}")
    return CheckResult(True, None, 0.0)


def confluence_check(A: NCAlgebra, words: Iterable[Word], seeds: Sequence[int] = (1, 2)) -> CheckResult:
    """Reductions of each word in different orders must agree.

    Compared: leftmost reduction, rightmost reduction, and a random first
    step (one per seed) followed by leftmost reduction.
    """
    n = 0
    for w in words:
        ref = A.normal_form(tuple(w))
        others = [("rightmost", None)] + [("random", s) for s in seeds]
        for strategy, s in others:
            other = A.normal_form(tuple(w), strategy=strategy, seed=s)
            if other != ref:
                return CheckResult(False, {"word": tuple(w), "strategy": strategy, "seed": s}, None,
                                   "reductions disagree")
        if A.normal_form(ref) != ref:
            return CheckResult(False, {"word": tuple(w)}, None, "normal form is not idempotent")
        n += 1
    return CheckResult(True, None, 0.0, f"{n} words")


def random_words(A: NCAlgebra, count: int, max_len: int = 4, seed: int = 0) -> list[Word]:
    rng = random.Random(seed)
    return [tuple(rng.choice(A.generators) for _ in range(rng.randint(2, max_len))) for _ in range(count)]


# ---------------------------------------------------------------------------
# semiclassical reading

def first_order(p: NCPoly) -> NCPoly:
    """Part of ``p`` linear in the deformation parameters (kinv, z, zp)."""
    return NCPoly({w: coeff(to_param_poly(c).part_of_degree(DEFORMATION_PARAMS, 1)) for w, c in p.terms.items()})


def semiclassical_exprs(A: NCAlgebra) -> dict[tuple[str, str], E.Expr]:
    """First-order part of every generator commutator, read commutatively."""
    out = {}
    for a, b in combinations(A.generators, 2):
        fo = first_order(commutator_nc(A, A.gen(a), A.gen(b)))
        out[(a, b)] = word_poly_to_expr({w: to_param_poly(c) for w, c in fo.terms.items()})
    return out


def semiclassical_compare(A: NCAlgebra, entry, plan: E.SamplePlan, tol: float = 1e-9) -> CheckResult:
    """First-order commutators against a Poisson table, pointwise."""
    from .catalog import _compare

    left = semiclassical_exprs(A)
    right = {}
    for a, b in left:
        right[(a, b)] = entry.bracket(a, b)
    return _compare(left, right, plan, tol, A.generators, relative=True)
