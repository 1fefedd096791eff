"""Registry of closed-form bracket tables and coordinate maps.

Entries live in ``data/catalog.json``.  Every right-hand side is an
expression string in the scalar grammar; quantum tables keep the printed
operator order, and reading them semiclassically just treats products as
commutative.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np

from . import expr as E
from .errors import CatalogError
from .params import DEFORMATION_PARAMS
from .polyexpr import to_word_poly, word_poly_to_expr
from .results import CheckResult

FORMAT = "ncphs-catalog"
VERSION = 1
KINDS = ("poisson", "quantum-linear", "quantum-quadratic", "quantum-function-coefficient", "coordinate-map")
PARAMETER_NAMES = ("eta", "kappa", "z", "zp")


@dataclass(frozen=True)
class Domain:
    """Sampling domain: coordinate ranges, denominator exclusion, default parameter values."""

    ranges: Mapping[str, tuple[float, float]] = field(default_factory=dict)
    exclusion: float = 0.05
    parameters: Mapping[str, float] = field(default_factory=dict)

    def plan(self, n_points: int = 100, seed: int = 0, overrides: Mapping[str, object] | None = None,
             exclusion: float | None = None) -> E.SamplePlan:
        fixed = dict(self.parameters)
        fixed.update(overrides or {})
        return E.SamplePlan(ranges=dict(self.ranges), n_points=n_points, seed=seed, fixed=fixed,
                            exclusion=self.exclusion if exclusion is None else exclusion)


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    kind: str
    coordinates: tuple[str, ...]
    parameters: tuple[str, ...]
    citation: str
    table: Mapping[tuple[str, str], E.Expr] = field(default_factory=dict)
    components: Mapping[str, E.Expr] = field(default_factory=dict)
    extras: Mapping[str, E.Expr] = field(default_factory=dict)
    domain: Domain = field(default_factory=Domain)
    flags: tuple[str, ...] = ()
    ordering: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise CatalogError(f"{self.name}: unknown kind {self.kind!r}")
        coords = set(self.coordinates)
        if len(coords) != len(self.coordinates):
            raise CatalogError(f"{self.name}: repeated coordinate names")
        seen = set()
        for a, b in self.table:
            if a not in coords or b not in coords or a == b:
                raise CatalogError(f"{self.name}: bad table key ({a}, {b})")
            if frozenset((a, b)) in seen:
                raise CatalogError(f"{self.name}: pair ({a}, {b}) given twice")
            seen.add(frozenset((a, b)))
        allowed = coords | set(self.parameters) | set(self.components)
        for e in list(self.table.values()) + list(self.components.values()) + list(self.extras.values()):
            stray = E.free_vars(e) - allowed
            if stray:
                raise CatalogError(f"{self.name}: undeclared symbols {sorted(stray)}")
        if self.kind == "coordinate-map" and self.table:
            raise CatalogError(f"{self.name}: a coordinate map has no bracket table")

    @property
    def is_map(self) -> bool:
        return self.kind == "coordinate-map"

    def bracket(self, a: str, b: str) -> E.Expr:
        """Right-hand side of [a, b] (or {a, b}), antisymmetric by construction."""
        if a not in self.coordinates or b not in self.coordinates:
            raise CatalogError(f"{self.name}: unknown coordinate in ({a}, {b})")
        if (a, b) in self.table:
            return self.table[(a, b)]
        if (b, a) in self.table:
            return E.neg(self.table[(b, a)])
        return E.ZERO

    def bracket_table(self, first_order: bool = False) -> "BracketTable":
        return BracketTable.from_entry(self, first_order)

    def with_entry(self, a: str, b: str, value: E.Expr) -> "CatalogEntry":
        """Copy with one table entry replaced (used for mutation tests)."""
        table = {k: v for k, v in self.table.items() if k not in ((a, b), (b, a))}
        table[(a, b)] = value
        return _replace(self, table=table)


def _replace(entry: CatalogEntry, **changes) -> CatalogEntry:
    data = {f: getattr(entry, f) for f in entry.__dataclass_fields__}
    data.update(changes)
    return CatalogEntry(**data)


@dataclass(frozen=True)
class BracketTable:
    """Dense antisymmetric table of expressions with evaluation and derivatives."""

    coordinates: tuple[str, ...]
    entries: tuple[tuple[E.Expr, ...], ...]

    @classmethod
    def from_entry(cls, entry: CatalogEntry, first_order: bool = False) -> "BracketTable":
        if entry.is_map:
            raise CatalogError(f"{entry.name} is a coordinate map, not a bracket table")
        n = len(entry.coordinates)
        rows = []
        for a in entry.coordinates:
            row = []
            for b in entry.coordinates:
                e = entry.bracket(a, b)
                if first_order:
                    e = first_order_part(e, entry.coordinates)
                row.append(e)
            rows.append(tuple(row))
        return cls(tuple(entry.coordinates), tuple(rows))

    def get(self, a: str, b: str) -> E.Expr:
        return self.entries[self.coordinates.index(a)][self.coordinates.index(b)]

    def denominators(self) -> list[E.Expr]:
        out = []
        for row in self.entries:
            for e in row:
                for d in E.denominators(e):
                    if d not in out:
                        out.append(d)
        return out

    def evaluate(self, point: Mapping[str, object]) -> np.ndarray:
        """Values with shape (n, n) or (n, n, m) for m vectorised points."""
        vals = [[E.evaluate(e, point) for e in row] for row in self.entries]
        shape = np.broadcast(*[v for row in vals for v in row]).shape
        return np.array([[np.broadcast_to(v, shape) for v in row] for row in vals])

    def derivative(self, i: int, j: int, k: int) -> E.Expr:
        return E.diff(self.entries[i][j], self.coordinates[k])


def first_order_part(e: E.Expr, coordinates: Sequence[str]) -> E.Expr:
    """Part of a polynomial right-hand side that is linear in the deformation parameters."""
    if E.free_vars(e) & {"kappa", "z", "zp"} == set():
        return e
    try:
        wp = to_word_poly(e, coordinates)
    except Exception:
        return e
    kept = {}
    for w, c in wp.items():
        part = c.part_of_degree(DEFORMATION_PARAMS, 1)
        if not part.is_zero():
            kept[w] = part
    return word_poly_to_expr(kept)


# ---------------------------------------------------------------------------
# loading and saving

def _entry_from_dict(d: Mapping) -> CatalogEntry:
    try:
        dom = d.get("domain", {})
        domain = Domain(
            ranges={k: (float(v[0]), float(v[1])) for k, v in dom.get("ranges", {}).items()},
            exclusion=float(dom.get("exclusion", 0.05)),
            parameters=dict(dom.get("parameters", {})),
        )
        table = {(a, b): E.parse(s) for a, b, s in d.get("table", [])}
        return CatalogEntry(
            name=d["name"], kind=d["kind"], coordinates=tuple(d["coordinates"]),
            parameters=tuple(d.get("parameters", ())), citation=d["citation"], table=table,
            components={k: E.parse(v) for k, v in d.get("components", {}).items()},
            extras={k: E.parse(v) for k, v in d.get("extras", {}).items()},
            domain=domain, flags=tuple(d.get("flags", ())), ordering=tuple(d.get("ordering", ())),
        )
    except KeyError as exc:
        raise CatalogError(f"catalog entry is missing field {exc}") from None


def _entry_to_dict(e: CatalogEntry) -> dict:
    out: dict = {"name": e.name, "kind": e.kind, "citation": e.citation,
                 "coordinates": list(e.coordinates), "parameters": list(e.parameters)}
    if e.ordering:
        out["ordering"] = list(e.ordering)
    if e.table:
        out["table"] = [[a, b, E.to_string(v)] for (a, b), v in e.table.items()]
    if e.components:
        out["components"] = {k: E.to_string(v) for k, v in e.components.items()}
    if e.extras:
        out["extras"] = {k: E.to_string(v) for k, v in e.extras.items()}
    dom: dict = {}
    if e.domain.ranges:
        dom["ranges"] = {k: [v[0], v[1]] for k, v in e.domain.ranges.items()}
    dom["exclusion"] = e.domain.exclusion
    if e.domain.parameters:
        dom["parameters"] = dict(e.domain.parameters)
    out["domain"] = dom
    if e.flags:
        out["flags"] = list(e.flags)
    return out


def loads(text: str) -> dict[str, CatalogEntry]:
    data = json.loads(text)
    if data.get("format") != FORMAT:
        raise CatalogError("not a catalog file")
    if data.get("version") != VERSION:
        raise CatalogError(f"unsupported catalog version {data.get('version')!r}")
    out = {}
    for d in data["entries"]:
        entry = _entry_from_dict(d)
        if entry.name in out:
            raise CatalogError(f"duplicate catalog entry {entry.name!r}")
        out[entry.name] = entry
    return out


def dumps(entries: Mapping[str, CatalogEntry]) -> str:
    data = {"format": FORMAT, "version": VERSION,
            "entries": [_entry_to_dict(e) for e in entries.values()]}
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


def catalog_text() -> str:
    return resources.files("ncphs.data").joinpath("catalog.json").read_text(encoding="utf-8")


_CACHE: dict = {}


def load_catalog() -> dict[str, CatalogEntry]:
    if "entries" not in _CACHE:
        _CACHE["entries"] = loads(catalog_text())
    return _CACHE["entries"]


def catalog_lookup(name: str) -> CatalogEntry:
    entries = load_catalog()
    if name not in entries:
        raise CatalogError(f"unknown catalog entry {name!r}; known: {sorted(entries)}")
    return entries[name]


# ---------------------------------------------------------------------------
# checks

def _points(plan: E.SamplePlan, coordinates: Sequence[str], guards: Sequence[E.Expr]) -> dict:
    return E.sample_points(plan, coordinates, guards)


def _witness(pts: Mapping[str, np.ndarray], k: int) -> dict:
    return {n: E._scalar(v[k]) for n, v in sorted(pts.items())}


def poisson_jacobi_check(entry: CatalogEntry, plan: E.SamplePlan, tol: float = 1e-8,
                         first_order: bool = False) -> CheckResult:
    """Sum over cyclic permutations of {a,{b,c}} at every sampled point, via exact derivatives.

    ``{a, {b, c}} = sum_k {a, x^k} d_k {b, c}`` for brackets among coordinates.
    """
    table = entry.bracket_table(first_order)
    n = len(table.coordinates)
    guards = table.denominators()
    pts = _points(plan, table.coordinates, guards)
    vals = table.evaluate(pts)
    m = len(next(iter(pts.values())))
    vals = np.broadcast_to(vals, (n, n, m)) if vals.ndim == 3 else vals[..., None] * np.ones(m)
    worst, worst_triple, worst_k = 0.0, None, 0
    grads: dict = {}

    def grad(i, j):
        if (i, j) not in grads:
            grads[(i, j)] = np.array([np.broadcast_to(E.evaluate(table.derivative(i, j, k), pts), (m,))
                                      for k in range(n)])
        return grads[(i, j)]

    for a, b, c in combinations(range(n), 3):
        res = np.zeros(m, dtype=vals.dtype)
        for x, y, w in ((a, b, c), (b, c, a), (c, a, b)):
            res = res + np.einsum("km,km->m", vals[x], grad(y, w))
        k = int(np.argmax(np.abs(res)))
        if abs(res[k]) > worst or worst_triple is None:
            worst, worst_triple, worst_k = float(abs(res[k])), (a, b, c), k
    if worst_triple is None:
        return CheckResult(True, None, 0.0, "fewer than three coordinates")
    names = tuple(table.coordinates[i] for i in worst_triple)
    passed = worst <= tol
    return CheckResult(passed, None if passed else {"triple": names, "point": _witness(pts, worst_k)},
                       worst, f"worst triple {names}")


def antisymmetry_check(entry: CatalogEntry, plan: E.SamplePlan) -> CheckResult:
    table = entry.bracket_table()
    pts = _points(plan, table.coordinates, table.denominators())
    v = table.evaluate(pts)
    dev = float(np.abs(v + np.swapaxes(v, 0, 1)).max()) if v.size else 0.0
    return CheckResult(dev == 0.0, None, dev)


def _compare(left: Mapping[tuple, E.Expr], right: Mapping[tuple, E.Expr], plan: E.SamplePlan,
             tol: float, variables: Sequence[str], relative: bool = False) -> CheckResult:
    guards: list = []
    for e in list(left.values()) + list(right.values()):
        guards.extend(E.denominators(e))
    pts = _points(plan, variables, guards)
    m = len(next(iter(pts.values())))
    worst, witness = 0.0, None
    for key in left:
        a = np.broadcast_to(E.evaluate(left[key], pts), (m,))
        b = np.broadcast_to(E.evaluate(right[key], pts), (m,))
        d = np.abs(a - b)
        if relative:
            d = d / (1.0 + np.maximum(np.abs(a), np.abs(b)))
        k = int(np.argmax(d))
        if d[k] > worst:
            worst = float(d[k])
            witness = {"entry": key, "point": _witness(pts, k),
                       "values": (E._scalar(a[k]), E._scalar(b[k]))}
    passed = worst <= tol
    return CheckResult(passed, None if passed else witness, worst)


def flat_limit_check(curved: CatalogEntry, flat: CatalogEntry, plan: E.SamplePlan,
                     eta: float = 1e-6, tol: float = 1e-4,
                     substitution: Mapping[str, str] | None = None) -> CheckResult:
    """Curved entry at small eta against the flat entry, pointwise.

    ``substitution`` maps curved coordinates onto expressions in the flat
    ones (for example s0 -> "x0", s4 -> "1"); coordinates absent from it
    must carry the same name.
    """
    subs = {c: E.parse(v) if isinstance(v, str) else v for c, v in (substitution or {}).items()}
    ren = {c: v.name for c, v in subs.items() if isinstance(v, E.Var)}
    fixed = dict(plan.fixed)
    fixed["eta"] = eta
    plan = plan.with_(fixed=fixed)
    if curved.is_map != flat.is_map:
        raise CatalogError("flat_limit_check compares two maps or two tables")
    if curved.is_map:
        if set(curved.components) != set(flat.components):
            raise CatalogError("maps have different components")
        variables = flat.coordinates
        cmap = {k: E.substitute(v, {c: subs.get(c, E.Var(c)) for c in curved.coordinates})
                for k, v in curved.components.items()}
        return _compare(cmap, dict(flat.components), plan, tol, variables)
    rename = {c: subs.get(c, E.Var(c)) for c in curved.coordinates}
    inverse = {ren.get(c, c): c for c in curved.coordinates if c not in subs or c in ren}
    left, right = {}, {}
    for a, b in combinations(flat.coordinates, 2):
        if a not in inverse or b not in inverse:
            raise CatalogError(f"flat coordinate pair ({a}, {b}) has no curved counterpart")
        left[(a, b)] = E.substitute(curved.bracket(inverse[a], inverse[b]), rename)
        right[(a, b)] = flat.bracket(a, b)
    return _compare(left, right, plan, tol, flat.coordinates)


def superposition_check(part_a: CatalogEntry, part_b: CatalogEntry, full: CatalogEntry,
                        plan: E.SamplePlan, tol: float = 1e-9) -> CheckResult:
    """Entrywise part_a + part_b against full, pointwise."""
    if not (set(part_a.coordinates) == set(part_b.coordinates) == set(full.coordinates)):
        raise CatalogError("superposition needs entries over the same coordinates")
    left, right = {}, {}
    for a, b in combinations(full.coordinates, 2):
        left[(a, b)] = E.add(part_a.bracket(a, b), part_b.bracket(a, b))
        right[(a, b)] = full.bracket(a, b)
    return _compare(left, right, plan, tol, full.coordinates, relative=True)


NULL_PLANE = {"sp": {"s0": 1, "s1": 1}, "sm": {"s0": 1, "s1": -1}, "s2": {"s2": 1}, "s3": {"s3": 1}}


def null_plane_check(null_entry: CatalogEntry, cartesian_entry: CatalogEntry, plan: E.SamplePlan,
                     tol: float = 1e-9) -> CheckResult:
    """Table in (sp, sm, s2, s3) against one in (s0..s3) under sp/sm = s0 +- s1.

    The cartesian brackets are combined linearly into null-plane ones, and the
    null-plane entry is evaluated at sp = s0 + s1, sm = s0 - s1.
    """
    sub = {"sp": E.add(E.Var("s0"), E.Var("s1")), "sm": E.sub(E.Var("s0"), E.Var("s1"))}
    left, right = {}, {}
    for a, b in combinations(null_entry.coordinates, 2):
        terms = []
        for ca, wa in NULL_PLANE[a].items():
            for cb, wb in NULL_PLANE[b].items():
                if ca != cb:
                    terms.append(E.mul(E.Const(Fraction(wa * wb)), cartesian_entry.bracket(ca, cb)))
        left[(a, b)] = E.add(*terms)
        right[(a, b)] = E.substitute(null_entry.bracket(a, b), sub)
    return _compare(left, right, plan, tol, cartesian_entry.coordinates, relative=True)


def table_equivalence_check(a: CatalogEntry, b: CatalogEntry, plan: E.SamplePlan,
                            tol: float = 1e-9) -> CheckResult:
    """Same coordinates, same brackets pointwise."""
    if tuple(a.coordinates) != tuple(b.coordinates):
        raise CatalogError("entries have different coordinates")
    left = {(x, y): a.bracket(x, y) for x, y in combinations(a.coordinates, 2)}
    right = {(x, y): b.bracket(x, y) for x, y in combinations(a.coordinates, 2)}
    return _compare(left, right, plan, tol, a.coordinates, relative=True)


def evaluate_map(entry: CatalogEntry, point: Mapping[str, object]) -> dict[str, object]:
    if not entry.is_map:
        raise CatalogError(f"{entry.name} is not a coordinate map")
    return {k: E.evaluate(v, point) for k, v in entry.components.items()}
