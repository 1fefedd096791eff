"""Numeric realisation of the group side: matrix representation, product-of-
exponentials charts, invariant vector fields, the Sklyanin bracket on the
homogeneous space, and the ambient (pseudosphere) coordinates.
"""
from __future__ import annotations

import cmath
import json
from dataclasses import dataclass
from importlib import resources
from typing import Mapping, Sequence

import numpy as np
from scipy.linalg import expm

from . import expr as E
from .errors import ChartError
from .lie import Bivector, LieAlgebra, bracket
from .polyexpr import param_point

BASIS = ("P0", "P1", "P2", "P3", "K1", "K2", "K3", "J1", "J2", "J3")
AMBIENT = ("s4", "s0", "s1", "s2", "s3")


def _display(x: Sequence[float], xi: Sequence[float], theta: Sequence[float], lam: float) -> np.ndarray:
    """x^mu rho(P_mu) + xi^a rho(K_a) + theta^a rho(J_a) as a single 5x5 matrix."""
    x0, x1, x2, x3 = x
    k1, k2, k3 = xi
    t1, t2, t3 = theta
    return np.array([
        [0.0, lam * x0, -lam * x1, -lam * x2, -lam * x3],
        [x0, 0.0, k1, k2, k3],
        [x1, k1, 0.0, -t3, t2],
        [x2, k2, t3, 0.0, -t1],
        [x3, k3, -t2, t1, 0.0],
    ])


@dataclass(frozen=True)
class MatrixRep:
    lam: float
    matrices: Mapping[str, np.ndarray]

    @property
    def dim(self) -> int:
        return 5

    def of(self, name: str) -> np.ndarray:
        return self.matrices[name]

    def stack(self) -> np.ndarray:
        return np.stack([self.matrices[b] for b in BASIS])


def rep_gLambda(lam: float) -> MatrixRep:
    """The faithful 5x5 representation, read off the general element one coefficient at a time."""
    mats = {}
    for k, name in enumerate(BASIS):
        coeffs = np.zeros(10)
        coeffs[k] = 1.0
        mats[name] = _display(coeffs[:4], coeffs[4:7], coeffs[7:], lam)
    return MatrixRep(float(lam), mats)


def representation_defect(rep: MatrixRep, g: LieAlgebra) -> float:
    """max |rho([X,Y]) - [rho X, rho Y]| over basis pairs, with eta**2 = -Lambda."""
    eta = cmath.sqrt(-rep.lam)
    worst = 0.0
    for i, a in enumerate(g.basis):
        for j, b in enumerate(g.basis):
            if j <= i:
                continue
            lhs = np.zeros((5, 5))
            for k, c in bracket(g, {i: _one()}, {j: _one()}).items():
                lhs = lhs + complex(c.evaluate({"eta": eta})).real * rep.of(g.basis[k])
            rhs = rep.of(a) @ rep.of(b) - rep.of(b) @ rep.of(a)
            worst = max(worst, float(np.abs(lhs - rhs).max()))
    return worst


def _one():
    from .params import ONE

    return ONE


def matrix_exp(m: np.ndarray) -> np.ndarray:
    """Matrix exponential (scaling and squaring with Pade approximants)."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("matrix_exp needs a square matrix")
    return expm(m)


# ---------------------------------------------------------------------------
# charts

@dataclass(frozen=True)
class ChartSpec:
    """Ordered product of exponentials: translation factors first, then isotropy factors."""

    name: str
    translations: tuple[tuple[str, str], ...]
    isotropy: tuple[tuple[str, str], ...]
    lam: float = 0.0

    def __post_init__(self):
        names = [c for c, _ in self.factors]
        if len(set(names)) != len(names):
            raise ChartError(f"chart {self.name!r} repeats a coordinate name")
        gens = sorted(g for _, g in self.factors)
        if gens != sorted(BASIS):
            raise ChartError(f"chart {self.name!r} generators do not span the algebra")

    @property
    def factors(self) -> tuple[tuple[str, str], ...]:
        return tuple(self.translations) + tuple(self.isotropy)

    @property
    def coordinates(self) -> tuple[str, ...]:
        return tuple(c for c, _ in self.factors)

    @property
    def translation_coordinates(self) -> tuple[str, ...]:
        return tuple(c for c, _ in self.translations)

    @property
    def isotropy_coordinates(self) -> tuple[str, ...]:
        return tuple(c for c, _ in self.isotropy)

    def at(self, lam: float) -> "ChartSpec":
        return ChartSpec(self.name, self.translations, self.isotropy, float(lam))

    def full_point(self, translation: Mapping[str, float],
                   isotropy: Mapping[str, float] | None = None) -> dict[str, float]:
        """Complete coordinates, with isotropy coordinates defaulting to zero."""
        out = {c: 0.0 for c in self.coordinates}
        for c, v in translation.items():
            if c not in out:
                raise ChartError(f"unknown coordinate {c!r} for chart {self.name!r}")
            out[c] = float(v)
        for c, v in (isotropy or {}).items():
            if c not in self.isotropy_coordinates:
                raise ChartError(f"{c!r} is not an isotropy coordinate of {self.name!r}")
            out[c] = float(v)
        return out


def load_charts() -> dict[str, ChartSpec]:
    data = json.loads(resources.files("ncphs.data").joinpath("charts.json").read_text(encoding="utf-8"))
    out = {}
    for entry in data["charts"]:
        out[entry["name"]] = ChartSpec(entry["name"], tuple(map(tuple, entry["translations"])),
                                       tuple(map(tuple, entry["isotropy"])), float(entry.get("Lambda", 0.0)))
    return out


def load_chart(name: str, lam: float | None = None) -> ChartSpec:
    charts = load_charts()
    if name not in charts:
        raise ChartError(f"unknown chart {name!r}; known: {sorted(charts)}")
    spec = charts[name]
    return spec if lam is None else spec.at(lam)


@dataclass(frozen=True)
class GroupPoint:
    coords: Mapping[str, float]
    matrix: np.ndarray


def _factors(spec: ChartSpec, coords: Mapping[str, float]):
    rep = rep_gLambda(spec.lam)
    missing = [c for c in spec.coordinates if c not in coords]
    if missing:
        raise ChartError(f"unassigned chart coordinates: {missing}")
    gens = [rep.of(g) for _, g in spec.factors]
    exps = [matrix_exp(coords[c] * m) for (c, _), m in zip(spec.factors, gens)]
    return gens, exps


def chart_eval(spec: ChartSpec, coords: Mapping[str, float]) -> GroupPoint:
    _, exps = _factors(spec, coords)
    g = np.eye(5)
    for f in exps:
        g = g @ f
    return GroupPoint(dict(coords), g)


def chart_jacobian(spec: ChartSpec, coords: Mapping[str, float]) -> tuple[np.ndarray, np.ndarray]:
    """Group matrix and d(vec G)/d(coords) via the product rule on the exponential factors."""
    gens, exps = _factors(spec, coords)
    n = len(exps)
    prefix = [np.eye(5)]
    for f in exps:
        prefix.append(prefix[-1] @ f)
    suffix = [np.eye(5)] * (n + 1)
    for k in range(n - 1, -1, -1):
        suffix[k] = exps[k] @ suffix[k + 1]
    jac = np.empty((25, n))
    for k in range(n):
        jac[:, k] = (prefix[k + 1] @ gens[k] @ suffix[k + 1]).ravel()
    return prefix[-1], jac


def invariant_fields(spec: ChartSpec, coords: Mapping[str, float],
                     residual_tol: float = 1e-9) -> tuple[np.ndarray, np.ndarray]:
    """Left- and right-invariant fields as columns in chart coordinates.

    Returns ``(XL, XR)`` of shape (n_coords, 10), column i being the field of
    the i-th basis generator.
    """
    g, jac = chart_jacobian(spec, coords)
    sv = np.linalg.svd(jac, compute_uv=False)
    if sv[-1] < 1e-10 * sv[0]:
        raise ChartError(f"chart Jacobian is rank deficient at {dict(coords)}")
    rep = rep_gLambda(spec.lam)
    left = np.stack([(g @ rep.of(b)).ravel() for b in BASIS], axis=1)
    right = np.stack([(rep.of(b) @ g).ravel() for b in BASIS], axis=1)
    sol, *_ = np.linalg.lstsq(jac, np.concatenate([left, right], axis=1), rcond=None)
    resid = np.abs(jac @ sol - np.concatenate([left, right], axis=1)).max()
    if resid > residual_tol * max(1.0, np.abs(left).max(), np.abs(right).max()):
        raise ChartError(f"invariant field solve left residual {resid:.3e} at {dict(coords)}")
    return sol[:, :10], sol[:, 10:]


@dataclass(frozen=True)
class NumericBracketTable:
    """Antisymmetric table of bracket values among named coordinates at one point."""

    coordinates: tuple[str, ...]
    values: np.ndarray

    def get(self, a: str, b: str):
        return self.values[self.coordinates.index(a), self.coordinates.index(b)]

    def transformed(self, jac: np.ndarray, names: Sequence[str]) -> "NumericBracketTable":
        """Push forward through a linear map with Jacobian ``jac`` (rows = new coordinates)."""
        v = jac @ self.values @ jac.T
        return NumericBracketTable(tuple(names), 0.5 * (v - v.T))


def sklyanin_bracket(spec: ChartSpec, r: Bivector, params: Mapping[str, object],
                     point: Mapping[str, float], isotropy: Mapping[str, float] | None = None
                     ) -> NumericBracketTable:
    """Brackets among translation coordinates from the Sklyanin bracket.

    ``params`` supplies numeric values for kappa (or kinv), eta, z, zp; eta
    may be complex (de Sitter).  Isotropy coordinates default to zero, which
    realises the projection to the homogeneous space.
    """
    coords = spec.full_point(point, isotropy)
    xl, xr = invariant_fields(spec, coords)
    rm = r.evaluate(len(BASIS), param_point(params))
    full = xl @ rm @ xl.T - xr @ rm @ xr.T
    nt = len(spec.translations)
    block = full[:nt, :nt]
    return NumericBracketTable(spec.translation_coordinates, 0.5 * (block - block.T))


# ---------------------------------------------------------------------------
# ambient coordinates

def curved_cosh(lam: float, u):
    """cosh(eta*u) with eta**2 = -Lambda, real for either sign of Lambda."""
    if lam < 0:
        return np.cosh(np.sqrt(-lam) * u)
    if lam > 0:
        return np.cos(np.sqrt(lam) * u)
    return np.ones_like(np.asarray(u, dtype=float))[()]


def curved_sinh(lam: float, u):
    """sinh(eta*u)/eta with eta**2 = -Lambda; equals u at Lambda = 0."""
    if lam < 0:
        w = np.sqrt(-lam)
        return np.sinh(w * u) / w
    if lam > 0:
        w = np.sqrt(lam)
        return np.sin(w * u) / w
    return np.asarray(u, dtype=float)[()]


def ambient_map(x: Sequence[float], lam: float) -> np.ndarray:
    """(s4, s0, s1, s2, s3) from geodesic parallel coordinates x^mu."""
    x0, x1, x2, x3 = (float(v) for v in x)
    c1, c2, c3 = curved_cosh(lam, x1), curved_cosh(lam, x2), curved_cosh(lam, x3)
    # cos(eta x0) and sin(eta x0)/eta are the same helpers with the curvature sign flipped
    return np.array([
        curved_cosh(-lam, x0) * c1 * c2 * c3,
        curved_sinh(-lam, x0) * c1 * c2 * c3,
        curved_sinh(lam, x1) * c2 * c3,
        curved_sinh(lam, x2) * c3,
        curved_sinh(lam, x3),
    ])


def pseudosphere(s: Sequence[float], lam: float) -> float:
    s4, s0, s1, s2, s3 = s
    return s4 ** 2 - lam * s0 ** 2 + lam * (s1 ** 2 + s2 ** 2 + s3 ** 2)


def ambient_constraint_check(s: Sequence[float], lam: float) -> float:
    """Residual |Sigma_Lambda(s) - 1|."""
    return abs(pseudosphere(s, lam) - 1.0)


_AMBIENT_CACHE: dict = {}


def _ambient_exprs():
    if "j" not in _AMBIENT_CACHE:
        from .catalog import catalog_lookup

        entry = catalog_lookup("ambient-map")
        comps = tuple(entry.components[s] for s in AMBIENT)
        derivs = [[E.diff(c, x) for x in entry.coordinates] for c in comps]
        _AMBIENT_CACHE["j"] = (entry.coordinates, comps, derivs)
    return _AMBIENT_CACHE["j"]


def ambient_jacobian(x: Sequence[float], lam: float) -> np.ndarray:
    """d s^alpha / d x^mu from exact derivatives of the ambient map (rows s4, s0..s3)."""
    coords, _, derivs = _ambient_exprs()
    point = dict(zip(coords, (float(v) for v in x)))
    point["eta"] = cmath.sqrt(-lam) if lam > 0 else float(np.sqrt(-lam))
    jac = np.array([[complex(E.evaluate(d, point)) for d in row] for row in derivs])
    if np.abs(jac.imag).max() > 1e-12:
        raise ChartError("ambient Jacobian is not real")
    return jac.real


def ambient_pushforward(table: NumericBracketTable, x: Sequence[float], lam: float) -> NumericBracketTable:
    """{s^a, s^b} = sum (ds^a/dx^mu)(ds^b/dx^nu){x^mu, x^nu} at the point x."""
    coords, _, _ = _ambient_exprs()
    if tuple(table.coordinates) != tuple(coords):
        raise ChartError(f"pushforward expects a table over {coords}, got {table.coordinates}")
    jac = ambient_jacobian(x, lam)
    if np.linalg.matrix_rank(jac) < 4:
        raise ChartError(f"ambient map is singular at {tuple(x)}")
    return table.transformed(jac, AMBIENT)
