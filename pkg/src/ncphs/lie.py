"""Exact Lie bialgebra computations over ParamPoly structure constants.

Tensors are sparse dicts from index tuples to :class:`ParamPoly`.  A bivector
``X_i ^ X_j`` means ``X_i (x) X_j - X_j (x) X_i``; its full-tensor component
``(i, j)`` is the stored coefficient and ``(j, i)`` its negative.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from . import expr as E
from .errors import AlgebraError
from .params import ParamPoly
from .polyexpr import to_linear, to_param_poly
from .results import CheckResult

Tensor = dict  # tuple[int, ...] -> ParamPoly


def _acc(out: Tensor, key: tuple, val: ParamPoly) -> None:
    cur = out.get(key)
    cur = val if cur is None else cur + val
    if cur.is_zero():
        out.pop(key, None)
    else:
        out[key] = cur


def _tensor_sub(a: Tensor, b: Tensor) -> Tensor:
    out = dict(a)
    for k, v in b.items():
        _acc(out, k, -v)
    return out


class LieAlgebra:
    """Finite-dimensional Lie algebra given by exact structure constants.

    ``brackets[(i, j)]`` maps output index ``k`` to ``C_ij^k`` for every
    ordered pair with a nonzero bracket (both orders are stored).
    """

    def __init__(self, basis: Sequence[str], brackets: Mapping[tuple[int, int], Mapping[int, ParamPoly]],
                 subalgebras: Mapping[str, Sequence[str]] | None = None,
                 isotropy: str | None = None, name: str = ""):
        self.name = name
        self.basis = tuple(basis)
        if len(set(self.basis)) != len(self.basis):
            raise AlgebraError("duplicate basis names")
        self._index = {b: i for i, b in enumerate(self.basis)}
        self._c: dict[tuple[int, int], dict[int, ParamPoly]] = {}
        for (i, j), out in brackets.items():
            clean = {k: ParamPoly.coerce(v) for k, v in out.items() if not ParamPoly.coerce(v).is_zero()}
            if not clean:
                continue
            if i == j:
                raise AlgebraError(f"[{self.basis[i]}, {self.basis[i]}] must vanish")
            if (j, i) in self._c:
                expected = {k: -v for k, v in clean.items()}
                if self._c[(j, i)] != expected:
                    raise AlgebraError(f"structure constants not antisymmetric at {self.basis[i]}, {self.basis[j]}")
            self._c[(i, j)] = clean
            self._c[(j, i)] = {k: -v for k, v in clean.items()}
        self.subalgebras = {k: tuple(v) for k, v in (subalgebras or {}).items()}
        for sub in self.subalgebras.values():
            for g in sub:
                self.index(g)
        if isotropy is not None and isotropy not in self.subalgebras:
            raise AlgebraError(f"isotropy subalgebra {isotropy!r} is not declared")
        self.isotropy = isotropy

    @property
    def dim(self) -> int:
        return len(self.basis)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise AlgebraError(f"{name!r} is not a generator of {self.name or 'the algebra'}") from None

    def structure(self, i: int, j: int) -> dict[int, ParamPoly]:
        return self._c.get((i, j), {})

    def with_isotropy(self, name: str) -> "LieAlgebra":
        return LieAlgebra(self.basis, self._upper(), self.subalgebras, name, self.name)

    def _upper(self):
        return {k: v for k, v in self._c.items() if k[0] < k[1]}

    def h_indices(self, h: Sequence[str] | str | None = None) -> tuple[int, ...]:
        if h is None:
            if self.isotropy is None:
                raise AlgebraError("no isotropy subalgebra declared")
            h = self.isotropy
        if isinstance(h, str):
            h = self.subalgebras[h]
        return tuple(sorted(self.index(g) for g in h))

    def specialize(self, **values) -> "LieAlgebra":
        """Substitute exact parameter values, e.g. ``eta=0`` for the Poincare algebra."""
        br = {k: {o: c.subs(values) for o, c in v.items()} for k, v in self._upper().items()}
        return LieAlgebra(self.basis, br, self.subalgebras, self.isotropy, self.name)

    def with_bracket(self, a: str, b: str, value: Mapping[str, object]) -> "LieAlgebra":
        """Copy with one bracket replaced (used for mutation tests)."""
        i, j = self.index(a), self.index(b)
        br = {k: v for k, v in self._upper().items() if k not in ((i, j), (j, i))}
        out = {self.index(n): ParamPoly.coerce(c) for n, c in value.items()}
        if i < j:
            br[(i, j)] = out
        else:
            br[(j, i)] = {k: -v for k, v in out.items()}
        return LieAlgebra(self.basis, br, self.subalgebras, self.isotropy, self.name)

    # elements are dicts index -> ParamPoly
    def element(self, spec: Mapping[str, object]) -> dict[int, ParamPoly]:
        return {self.index(k): ParamPoly.coerce(v) for k, v in spec.items() if not ParamPoly.coerce(v).is_zero()}

    def named(self, elem: Mapping[int, ParamPoly]) -> dict[str, ParamPoly]:
        return {self.basis[i]: c for i, c in sorted(elem.items())}

    def __repr__(self) -> str:
        return f"LieAlgebra({self.name or '?'}, dim={self.dim})"


def bracket(g: LieAlgebra, x: Mapping[int, ParamPoly], y: Mapping[int, ParamPoly]) -> dict[int, ParamPoly]:
    """Lie bracket of two elements given as {index: coefficient}."""
    for k in list(x) + list(y):
        if not 0 <= k < g.dim:
            raise AlgebraError(f"index {k} outside an algebra of dimension {g.dim}")
    out: Tensor = {}
    for i, a in x.items():
        for j, b in y.items():
            for k, c in g.structure(i, j).items():
                _acc(out, k, a * b * c)
    return out


def bracket_names(g: LieAlgebra, x: str, y: str) -> dict[str, ParamPoly]:
    return g.named(bracket(g, g.element({x: 1}), g.element({y: 1})))


def jacobi_check(g: LieAlgebra) -> CheckResult:
    """Exact Jacobi identity on every basis triple."""
    n = g.dim
    for i, j, k in combinations(range(n), 3):
        total: Tensor = {}
        for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
            for m, cab in g.structure(a, b).items():
                for l, cmc in g.structure(m, c).items():
                    _acc(total, l, cab * cmc)
        if total:
            return CheckResult(False, witness=(g.basis[i], g.basis[j], g.basis[k]),
                               detail=f"Jacobi sum = {g.named(total)}")
    return CheckResult(True)


def closes(g: LieAlgebra, h: Sequence[str] | str | None = None) -> CheckResult:
    """Whether the (declared) subalgebra is closed under the bracket."""
    hi = set(g.h_indices(h))
    for i, j in combinations(sorted(hi), 2):
        out = set(g.structure(i, j)) - hi
        if out:
            return CheckResult(False, witness=(g.basis[i], g.basis[j]))
    return CheckResult(True)


# ---------------------------------------------------------------------------
# tensors

def ad_tensor(g: LieAlgebra, x: int, t: Tensor) -> Tensor:
    """Adjoint action of basis element ``x`` on every leg of a tensor."""
    out: Tensor = {}
    for key, v in t.items():
        for p, ip in enumerate(key):
            for k, c in g.structure(x, ip).items():
                _acc(out, key[:p] + (k,) + key[p + 1:], v * c)
    return out


@dataclass(frozen=True)
class Bivector:
    """Antisymmetric 2-tensor, stored as {(i, j) with i < j: coefficient of X_i ^ X_j}."""

    coeffs: Mapping[tuple[int, int], ParamPoly] = field(default_factory=dict)

    @classmethod
    def from_terms(cls, g: LieAlgebra, terms: Iterable[tuple[str, str, object]]) -> "Bivector":
        out: Tensor = {}
        for a, b, c in terms:
            i, j = g.index(a), g.index(b)
            if i == j:
                raise AlgebraError(f"{a} ^ {a} vanishes identically")
            c = ParamPoly.coerce(c)
            if i > j:
                i, j, c = j, i, -c
            _acc(out, (i, j), c)
        return cls(out)

    @classmethod
    def from_tensor(cls, t: Tensor) -> "Bivector":
        out: Tensor = {}
        for (i, j), v in t.items():
            if i == j or t.get((j, i), ParamPoly()) != -v:
                raise AlgebraError(f"tensor is not antisymmetric at {(i, j)}")
            if i < j:
                out[(i, j)] = v
        return cls(out)

    def full(self) -> Tensor:
        out: Tensor = {}
        for (i, j), v in self.coeffs.items():
            out[(i, j)] = v
            out[(j, i)] = -v
        return out

    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "Bivector") -> "Bivector":
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            _acc(out, k, v)
        return Bivector(out)

    def scale(self, c) -> "Bivector":
        c = ParamPoly.coerce(c)
        return Bivector({k: v * c for k, v in self.coeffs.items() if not (v * c).is_zero()})

    def subs(self, **values) -> "Bivector":
        out = {}
        for k, v in self.coeffs.items():
            s = v.subs(values)
            if not s.is_zero():
                out[k] = s
        return Bivector(out)

    def evaluate(self, dim: int, values: Mapping[str, object]):
        import numpy as np

        vals = [v.evaluate(values) for v in self.coeffs.values()]
        dtype = complex if any(isinstance(v, complex) for v in vals) else float
        m = np.zeros((dim, dim), dtype=dtype)
        for (i, j), v in zip(self.coeffs, vals):
            m[i, j] += v
            m[j, i] -= v
        return m

    def describe(self, g: LieAlgebra) -> str:
        if not self.coeffs:
            return "0"
        return " + ".join(f"({v})*{g.basis[i]}^{g.basis[j]}" for (i, j), v in sorted(self.coeffs.items()))

    def __eq__(self, other) -> bool:
        return isinstance(other, Bivector) and dict(self.coeffs) == dict(other.coeffs)

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))


@dataclass(frozen=True)
class Trivector:
    """Totally antisymmetric 3-tensor, stored on increasing index triples."""

    coeffs: Mapping[tuple[int, int, int], ParamPoly] = field(default_factory=dict)

    @classmethod
    def from_tensor(cls, t: Tensor) -> "Trivector":
        out: Tensor = {}
        for key, v in t.items():
            i, j, k = key
            for perm, sign in (((j, i, k), -1), ((i, k, j), -1), ((k, j, i), -1),
                               ((j, k, i), 1), ((k, i, j), 1)):
                if t.get(perm, ParamPoly()) != v * sign:
                    raise AlgebraError(f"tensor is not totally antisymmetric at {key}")
            if i < j < k:
                out[key] = v
        return cls(out)

    def full(self) -> Tensor:
        out: Tensor = {}
        for (i, j, k), v in self.coeffs.items():
            for perm, sign in (((i, j, k), 1), ((j, k, i), 1), ((k, i, j), 1),
                               ((j, i, k), -1), ((i, k, j), -1), ((k, j, i), -1)):
                out[perm] = v * sign
        return out

    def is_zero(self) -> bool:
        return not self.coeffs


@dataclass(frozen=True)
class Cocommutator:
    """The map X_i -> delta(X_i), one bivector per generator index."""

    images: Mapping[int, Bivector]

    def of(self, i: int) -> Bivector:
        return self.images.get(i, Bivector())

    def is_zero(self) -> bool:
        return all(b.is_zero() for b in self.images.values())

    def __add__(self, other: "Cocommutator") -> "Cocommutator":
        keys = set(self.images) | set(other.images)
        return Cocommutator({k: self.of(k) + other.of(k) for k in keys})


def cocommutator_from_r(g: LieAlgebra, r: Bivector) -> Cocommutator:
    """delta(X) = [X (x) 1 + 1 (x) X, r] for every basis element."""
    rt = r.full()
    return Cocommutator({x: Bivector.from_tensor(ad_tensor(g, x, rt)) for x in range(g.dim)})


def cocycle_check(g: LieAlgebra, delta: Cocommutator) -> CheckResult:
    """delta([X_i, X_j]) = ad_{X_i} delta(X_j) - ad_{X_j} delta(X_i) for all pairs."""
    for i, j in combinations(range(g.dim), 2):
        lhs: Tensor = {}
        for k, c in g.structure(i, j).items():
            for key, v in delta.of(k).full().items():
                _acc(lhs, key, c * v)
        rhs = _tensor_sub(ad_tensor(g, i, delta.of(j).full()), ad_tensor(g, j, delta.of(i).full()))
        diff = _tensor_sub(lhs, rhs)
        if diff:
            return CheckResult(False, witness=(g.basis[i], g.basis[j]))
    return CheckResult(True)


def schouten(g: LieAlgebra, r: Bivector) -> Trivector:
    """[[r, r]] = [r12, r13] + [r12, r23] + [r13, r23]."""
    rt = r.full()
    out: Tensor = {}
    items = list(rt.items())
    for (i, j), a in items:
        for (k, l), b in items:
            ab = a * b
            for m, c in g.structure(i, k).items():
                _acc(out, (m, j, l), ab * c)
            for m, c in g.structure(j, k).items():
                _acc(out, (i, m, l), ab * c)
            for m, c in g.structure(j, l).items():
                _acc(out, (i, k, m), ab * c)
    return Trivector.from_tensor(out)


TRIANGULAR = "triangular"
QUASITRIANGULAR = "quasitriangular"
NOT_A_BIALGEBRA = "not-a-bialgebra"


@dataclass(frozen=True)
class MCYBEResult:
    classification: str
    schouten: Trivector
    witness: str | None = None


def mcybe_check(g: LieAlgebra, r: Bivector) -> MCYBEResult:
    """Classify r by its Schouten bracket and the ad-invariance of that bracket."""
    s = schouten(g, r)
    if s.is_zero():
        return MCYBEResult(TRIANGULAR, s)
    st = s.full()
    for x in range(g.dim):
        ad = ad_tensor(g, x, st)
        if ad:
            key, val = min(ad.items())
            comp = "(x)".join(g.basis[i] for i in key)
            return MCYBEResult(NOT_A_BIALGEBRA, s, witness=f"ad_{g.basis[x]}[[r,r]] has {comp} component {val}")
    return MCYBEResult(QUASITRIANGULAR, s)


def coisotropy_check(g: LieAlgebra, delta: Cocommutator, h=None) -> CheckResult:
    """delta(h) has no t ^ t component."""
    hi = set(g.h_indices(h))
    for x in sorted(hi):
        for (i, j), v in delta.of(x).coeffs.items():
            if i not in hi and j not in hi:
                return CheckResult(False, witness=g.basis[x],
                                   detail=f"delta({g.basis[x]}) has {g.basis[i]}^{g.basis[j]} component {v}")
    return CheckResult(True)


def subgroup_check(g: LieAlgebra, delta: Cocommutator, h=None) -> CheckResult:
    """delta(h) lies in h ^ h."""
    hi = set(g.h_indices(h))
    for x in sorted(hi):
        for (i, j), v in delta.of(x).coeffs.items():
            if i not in hi or j not in hi:
                return CheckResult(False, witness=g.basis[x],
                                   detail=f"delta({g.basis[x]}) has {g.basis[i]}^{g.basis[j]} component {v}")
    return CheckResult(True)


def annihilator_first_order(g: LieAlgebra, delta: Cocommutator, h=None,
                            coordinates: Mapping[str, str] | None = None) -> LieAlgebra:
    """First-order noncommutative space: the bracket on the dual coordinates of t.

    ``[t^j, t^k] = sum_l f^{jk}_l t^l`` where ``f^{jk}_l`` is the ``T_j (x) T_k``
    component of ``delta(T_l)``.  ``coordinates`` renames each translation
    generator's dual (e.g. ``{"P0": "x0"}``).
    """
    if not coisotropy_check(g, delta, h):
        raise AlgebraError("coisotropy condition fails; the annihilator is not a subalgebra")
    hi = set(g.h_indices(h))
    t = [i for i in range(g.dim) if i not in hi]
    pos = {i: p for p, i in enumerate(t)}
    names = [(coordinates or {}).get(g.basis[i], g.basis[i] + "*") for i in t]
    br: dict = {}
    for l in t:
        for (j, k), v in delta.of(l).coeffs.items():
            if j in pos and k in pos:
                br.setdefault((pos[j], pos[k]), {})[pos[l]] = v
    return LieAlgebra(names, br, name=f"dual({g.name})")


# ---------------------------------------------------------------------------
# screening for sub-Lie-bialgebra r-matrices

@dataclass
class ScreenResult:
    """Null space of the linear conditions delta_r(h) in h ^ h on r in g ^ g."""

    algebra: LieAlgebra
    pairs: list[tuple[int, int]]
    basis: list  # sympy column vectors over QQ(eta)
    field: object

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def contains(self, r: Bivector) -> bool:
        """Membership of r (with z, zp, kinv treated as independent scalars)."""
        from sympy.polys.matrices import DomainMatrix

        parts: dict = {}
        for (i, j), c in r.coeffs.items():
            for exp, q in c.terms.items():
                key = exp[1:]
                parts.setdefault(key, {})
                parts[key][(i, j)] = parts[key].get((i, j), 0) + q * self._eta(exp[0])
        if not parts:
            return True
        base_rank = len(self.basis)
        for comp in parts.values():
            vec = [self.field.convert(comp.get(p, 0)) for p in self.pairs]
            rows = [list(v) for v in self.basis] + [vec]
            m = DomainMatrix(rows, (len(rows), len(self.pairs)), self.field)
            if m.rank() != base_rank:
                return False
        return True

    def _eta(self, k: int):
        import sympy

        return sympy.Symbol("eta") ** k


def subgroup_screen(g: LieAlgebra, h=None) -> ScreenResult:
    """Exact basis of {r in g ^ g : delta_r(h) in h ^ h}, eta kept symbolic."""
    import sympy
    from sympy.polys.matrices import DomainMatrix

    eta = sympy.Symbol("eta")
    fld = sympy.QQ.frac_field(eta)
    hi = set(g.h_indices(h))
    pairs = list(combinations(range(g.dim), 2))
    rows: dict = {}
    for col, (a, b) in enumerate(pairs):
        delta = cocommutator_from_r(g, Bivector({(a, b): ParamPoly.const(1)}))
        for x in sorted(hi):
            for (i, j), v in delta.of(x).coeffs.items():
                if i in hi and j in hi:
                    continue
                if v.variables() - {"eta"}:
                    raise AlgebraError("structure constants may only depend on eta for screening")
                expr = sum(sympy.Rational(q.numerator, q.denominator) * eta ** e[0] for e, q in v.terms.items())
                rows.setdefault((x, i, j), [0] * len(pairs))[col] = fld.convert(expr)
    mat = [[c if c else fld.zero for c in row] for row in rows.values()]
    if not mat:
        basis = [[fld.one if k == c else fld.zero for k in range(len(pairs))] for c in range(len(pairs))]
        return ScreenResult(g, pairs, basis, fld)
    ns = DomainMatrix(mat, (len(mat), len(pairs)), fld).nullspace()
    basis = [list(row) for row in ns.to_list()]
    return ScreenResult(g, pairs, basis, fld)


# ---------------------------------------------------------------------------
# data files

def _data_text(name: str) -> str:
    return resources.files("ncphs.data").joinpath(name).read_text(encoding="utf-8")


def algebra_from_dict(data: Mapping) -> LieAlgebra:
    basis = list(data["basis"])
    index = {b: i for i, b in enumerate(basis)}
    br: dict = {}
    for key, text in data["brackets"].items():
        a, b = (s.strip() for s in key.split(","))
        lin = to_linear(E.parse(text), basis)
        if a not in index or b not in index:
            raise AlgebraError(f"unknown generator in bracket {key!r}")
        i, j = index[a], index[b]
        vals = {index[n]: c for n, c in lin.items()}
        if (i, j) in br or (j, i) in br:
            raise AlgebraError(f"bracket {key!r} given twice")
        if i < j:
            br[(i, j)] = vals
        else:
            br[(j, i)] = {k: -v for k, v in vals.items()}
    return LieAlgebra(basis, br, data.get("subalgebras"), data.get("isotropy"), data.get("name", ""))


def load_algebra(name: str = "g_Lambda", path: str | None = None) -> LieAlgebra:
    """Load a Lie algebra by name from the shipped data (or from ``path``)."""
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    else:
        data = json.loads(_data_text("algebras.json"))
    for entry in data["algebras"]:
        if entry["name"] == name:
            return algebra_from_dict(entry)
    raise AlgebraError(f"unknown algebra {name!r}")


@dataclass(frozen=True)
class RMatrixSpec:
    name: str
    algebra: str
    bivector_terms: tuple
    setting: Mapping[str, int]
    description: str = ""

    def build(self, g: LieAlgebra) -> Bivector:
        terms = [(a, b, to_param_poly(E.parse(c))) for a, b, c in self.bivector_terms]
        return Bivector.from_terms(g, terms)


def load_rmatrices(path: str | None = None) -> dict[str, RMatrixSpec]:
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    else:
        data = json.loads(_data_text("rmatrices.json"))
    out = {}
    for entry in data["rmatrices"]:
        out[entry["name"]] = RMatrixSpec(entry["name"], entry["algebra"],
                                         tuple(tuple(t) for t in entry["terms"]),
                                         entry.get("setting", {}), entry.get("description", ""))
    return out


def load_rmatrix(name: str) -> tuple[LieAlgebra, Bivector]:
    """The algebra (specialised to the r-matrix's setting) and the r-matrix itself."""
    specs = load_rmatrices()
    if name not in specs:
        raise AlgebraError(f"unknown r-matrix {name!r}; known: {sorted(specs)}")
    spec = specs[name]
    g = load_algebra(spec.algebra)
    if spec.setting:
        g = g.specialize(**spec.setting)
    return g, spec.build(g)
