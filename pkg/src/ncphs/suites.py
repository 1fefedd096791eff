"""Declarative verification suites.

A suite is a named list of checks in ``data/suites.json``.  Each check names
an operation from :data:`OPERATIONS` plus its arguments, so adding an
r-matrix or algebra to a suite is a data change.  ``run_suite`` executes the
checks under a :class:`SuiteConfig` and returns a :class:`Report`.
"""
from __future__ import annotations

import cmath
import json
import math
import random
import time
from dataclasses import dataclass, field, fields
from fractions import Fraction
from importlib import resources
from itertools import combinations
from typing import Any, Callable, Mapping

import numpy as np

from . import catalog as C
from . import chart as CH
from . import expr as E
from . import lie as L
from . import nc as N
from . import phase_space as PS
from .errors import ConfigError, NCPhsError, ReportError
from .polyexpr import to_word_poly
from .results import CheckResult

REPORT_FORMAT = "ncphs-report"
REPORT_VERSION = 1
VERDICTS = ("pass", "fail", "skip")


# ---------------------------------------------------------------------------
# configuration

@dataclass(frozen=True)
class SuiteConfig:
    suite: str
    eta: float | None = None
    lam: float | None = None
    kappa: float = 1.0
    z: float = 0.3
    zprime: float = 0.2
    seed: int = 0
    points: int = 100
    tol: float | None = None
    format: str = "json"
    out: str | None = None
    include_runtime: bool = False
    suites_file: str | None = None

    def __post_init__(self):
        for name in ("eta", "lam", "kappa", "z", "zprime", "tol"):
            v = getattr(self, name)
            if v is not None and not (isinstance(v, (int, float)) and math.isfinite(v)):
                raise ConfigError(f"{name} must be a finite number, got {v!r}")
        if self.kappa == 0:
            raise ConfigError("kappa must be nonzero")
        if self.eta is not None and self.lam is not None and not math.isclose(-self.eta ** 2, self.lam):
            raise ConfigError("eta and Lambda given with Lambda != -eta**2")
        if self.points < 1:
            raise ConfigError("points must be positive")
        if self.tol is not None and self.tol <= 0:
            raise ConfigError("tol must be positive")
        if self.format not in ("json", "markdown"):
            raise ConfigError(f"unknown format {self.format!r}")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SuiteConfig":
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config keys {sorted(extra)}")
        if "suite" not in data:
            raise ConfigError("config needs a suite name")
        return cls(**data)

    @classmethod
    def from_file(cls, path: str, **overrides) -> "SuiteConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not JSON: {exc}") from None
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_dict(data)

    def echo(self) -> dict:
        """Fields that affect verdicts (output settings left out)."""
        if self.lam is None:
            eta = 0.5 if self.eta is None else self.eta
            lam = -eta ** 2 + 0.0
        else:
            eta, lam = self.eta, self.lam
        return {"suite": self.suite, "eta": eta, "Lambda": lam, "kappa": self.kappa,
                "z": self.z, "zprime": self.zprime, "seed": self.seed, "points": self.points,
                "tol": self.tol}


@dataclass(frozen=True)
class Params:
    eta: complex | float
    lam: float
    kappa: float
    z: float
    zp: float

    def values(self) -> dict[str, object]:
        return {"eta": self.eta, "kappa": self.kappa, "z": self.z, "zp": self.zp}


def _eta_for(lam: float):
    return cmath.sqrt(-lam) if lam > 0 else math.sqrt(-lam)


# ---------------------------------------------------------------------------
# suite definitions

@dataclass(frozen=True)
class CheckSpec:
    name: str
    op: str
    args: Mapping[str, Any] = field(default_factory=dict)
    citation: str = ""
    group: str = ""
    aspect: str = ""
    requires: tuple[str, ...] = ()


def _suite_data(path: str | None) -> dict:
    try:
        if path is None:
            text = resources.files("ncphs.data").joinpath("suites.json").read_text(encoding="utf-8")
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
    except (OSError, FileNotFoundError) as exc:
        raise ConfigError(f"suite file missing: {exc}") from None
    data = json.loads(text)
    if data.get("format") != "ncphs-suites":
        raise ConfigError("not a suite file")
    return data


def load_suites(path: str | None = None) -> dict[str, list[CheckSpec]]:
    """All suites, with ``all`` as the union of the others when not given explicitly."""
    data = _suite_data(path)
    out: dict[str, list[CheckSpec]] = {}
    for name, checks in data["suites"].items():
        specs = []
        seen = set()
        for c in checks:
            if c["name"] in seen:
                raise ConfigError(f"suite {name!r} repeats check {c['name']!r}")
            seen.add(c["name"])
            if c["op"] not in OPERATIONS:
                raise ConfigError(f"check {c['name']!r} uses unknown operation {c['op']!r}")
            specs.append(CheckSpec(c["name"], c["op"], c.get("args", {}), c.get("citation", ""),
                                   c.get("group", ""), c.get("aspect", ""), tuple(c.get("requires", ()))))
        out[name] = specs
    if "all" not in out:
        merged: dict[str, CheckSpec] = {}
        for specs in out.values():
            for s in specs:
                if s.name in merged and merged[s.name] != s:
                    raise ConfigError(f"check {s.name!r} is defined differently in two suites")
                merged[s.name] = s
        out["all"] = list(merged.values())
    return out


# ---------------------------------------------------------------------------
# run context

class Context:
    def __init__(self, config: SuiteConfig):
        self.config = config
        self._screen = None

    def params(self, args: Mapping[str, Any]) -> Params:
        c = self.config
        if "lam" in args:
            lam = float(args["lam"])
            eta = _eta_for(lam)
        elif "eta" in args:
            eta = float(args["eta"])
            lam = -eta ** 2 + 0.0
        elif c.lam is not None:
            lam = c.lam
            eta = _eta_for(lam)
        else:
            eta = 0.5 if c.eta is None else c.eta
            lam = -eta ** 2 + 0.0
        return Params(eta, lam, c.kappa, c.z, c.zprime)

    def tol(self, args: Mapping[str, Any], default: float) -> float:
        if self.config.tol is not None:
            return self.config.tol
        return float(args.get("tol", default))

    def points(self, args: Mapping[str, Any]) -> int:
        return int(args.get("points", self.config.points))

    def plan(self, entry: C.CatalogEntry, args: Mapping[str, Any], p: Params | None = None) -> E.SamplePlan:
        p = p or self.params(args)
        used = set(entry.parameters) | set(entry.domain.parameters)
        return entry.domain.plan(n_points=self.points(args), seed=self.config.seed,
                                 overrides={k: v for k, v in p.values().items() if k in used})

    def screen(self):
        if self._screen is None:
            self._screen = L.subgroup_screen(L.load_algebra())
        return self._screen


Outcome = CheckResult


def _expect(result: CheckResult, expect: bool, what: str) -> CheckResult:
    """Turn an expected pass or an expected failure into a pass."""
    if result.passed == expect:
        detail = result.detail or ("holds" if expect else "fails as expected")
        return CheckResult(True, result.witness if not expect else None, result.max_deviation, detail)
    return CheckResult(False, result.witness, result.max_deviation,
                       f"{what} {'fails' if expect else 'unexpectedly holds'}" +
                       (f": {result.detail}" if result.detail else ""))


# ---------------------------------------------------------------------------
# operations

def op_mcybe(ctx: Context, args) -> CheckResult:
    g, r = L.load_rmatrix(args["rmatrix"])
    res = L.mcybe_check(g, r)
    ok = res.classification == args["expect"]
    return CheckResult(ok, res.witness, None, f"classified {res.classification}")


def op_cocycle(ctx: Context, args) -> CheckResult:
    g, r = L.load_rmatrix(args["rmatrix"])
    return L.cocycle_check(g, L.cocommutator_from_r(g, r))


def op_coisotropy(ctx: Context, args) -> CheckResult:
    g, r = L.load_rmatrix(args["rmatrix"])
    res = L.coisotropy_check(g, L.cocommutator_from_r(g, r), args.get("subalgebra"))
    return _expect(res, args.get("expect", True), "coisotropy")


def op_subgroup(ctx: Context, args) -> CheckResult:
    g, r = L.load_rmatrix(args["rmatrix"])
    res = L.subgroup_check(g, L.cocommutator_from_r(g, r), args.get("subalgebra"))
    return _expect(res, args.get("expect", True), "sub-bialgebra condition")


def op_screen_dimension(ctx: Context, args) -> CheckResult:
    dim = ctx.screen().dimension
    return CheckResult(dim == args["expect"], None if dim == args["expect"] else {"dimension": dim},
                       None, f"dimension {dim}")


def op_screen_member(ctx: Context, args) -> CheckResult:
    _, r = L.load_rmatrix(args["rmatrix"])
    inside = ctx.screen().contains(r)
    return _expect(CheckResult(inside), args.get("expect", True), "screen membership")


def op_first_order_space(ctx: Context, args) -> CheckResult:
    g, r = L.load_rmatrix(args["rmatrix"])
    names = dict(args["coordinates"])
    dual = L.annihilator_first_order(g, L.cocommutator_from_r(g, r), args.get("subalgebra"), names)
    entry = C.catalog_lookup(args["catalog"])
    coords = entry.coordinates
    if set(dual.basis) != set(coords):
        return CheckResult(False, {"dual": list(dual.basis), "catalog": list(coords)}, None,
                           "coordinate sets differ")
    for a, b in combinations(coords, 2):
        got = {(dual.basis[k],): c for k, c in dual.structure(dual.index(a), dual.index(b)).items()}
        want = {w: c for w, c in to_word_poly(entry.bracket(a, b), coords).items() if not c.is_zero()}
        if got != want:
            return CheckResult(False, {"pair": [a, b], "dual": _fmt_wp(got), "catalog": _fmt_wp(want)},
                               None, f"bracket ({a}, {b}) differs")
    return CheckResult(True, None, 0.0, f"{len(coords)} coordinates, exact")


def _fmt_wp(wp) -> dict:
    return {" ".join(w): str(c) for w, c in sorted(wp.items())}


def _reindex(src: tuple, dst: tuple) -> list[int]:
    return [src.index(c) for c in dst]


def op_sklyanin_vs_catalog(ctx: Context, args) -> CheckResult:
    p = ctx.params(args)
    spec = CH.load_chart(args["chart"], p.lam)
    _, r = L.load_rmatrix(args["rmatrix"])
    entry = C.catalog_lookup(args["catalog"])
    table = entry.bracket_table()
    tc = spec.translation_coordinates
    pts = E.sample_points(ctx.plan(entry, args, p), tc, table.denominators())
    m = len(pts[tc[0]])
    idx = _reindex(table.coordinates, tc)
    worst, witness = 0.0, None
    for k in range(m):
        point = {c: float(pts[c][k]) for c in tc}
        num = CH.sklyanin_bracket(spec, r, p.values(), point)
        ref = table.evaluate({**point, **p.values()})[np.ix_(idx, idx)]
        d = float(np.abs(num.values - ref).max())
        if d > worst:
            worst, witness = d, point
    tol = ctx.tol(args, 1e-8)
    return CheckResult(worst <= tol, None if worst <= tol else {"point": witness}, worst,
                       f"{m} points, Lambda = {p.lam:g}")


def _pushforward_samples(ctx: Context, args, p: Params):
    plan = E.SamplePlan(n_points=ctx.points(args), seed=ctx.config.seed,
                        default_range=tuple(args.get("range", (-0.7, 0.7))))
    xs = ("x0", "x1", "x2", "x3")
    pts = E.sample_points(plan, xs)
    spec = CH.load_chart("adS-spacetime", p.lam)
    _, r = L.load_rmatrix(args["rmatrix"])
    for k in range(len(pts["x0"])):
        x = [float(pts[c][k]) for c in xs]
        num = CH.sklyanin_bracket(spec, r, p.values(), dict(zip(xs, x)))
        yield x, CH.ambient_pushforward(num, x, p.lam), CH.ambient_map(x, p.lam)


def op_pushforward_vs_catalog(ctx: Context, args) -> CheckResult:
    p = ctx.params(args)
    entry = C.catalog_lookup(args["catalog"])
    table = entry.bracket_table(first_order=args.get("first_order", False))
    coords = tuple(c for c in CH.AMBIENT if c in table.coordinates)
    i_num = _reindex(CH.AMBIENT, coords)
    i_ref = _reindex(table.coordinates, coords)
    worst, witness = 0.0, None
    for x, pushed, s in _pushforward_samples(ctx, args, p):
        ref = table.evaluate({**dict(zip(CH.AMBIENT, s)), **p.values()})[np.ix_(i_ref, i_ref)]
        d = float(np.abs(pushed.values[np.ix_(i_num, i_num)] - ref).max())
        if d > worst:
            worst, witness = d, x
    tol = ctx.tol(args, 1e-8)
    return CheckResult(worst <= tol, None if worst <= tol else {"x": witness}, worst,
                       f"Lambda = {p.lam:g}, coordinates {' '.join(coords)}")


def op_pushforward_s4_central(ctx: Context, args) -> CheckResult:
    p = ctx.params(args)
    worst, witness = 0.0, None
    for x, pushed, _ in _pushforward_samples(ctx, args, p):
        d = float(np.abs(pushed.values[0]).max())
        if d > worst:
            worst, witness = d, x
    tol = ctx.tol(args, 1e-9)
    return CheckResult(worst <= tol, None if worst <= tol else {"x": witness}, worst, f"Lambda = {p.lam:g}")


def op_pseudosphere(ctx: Context, args) -> CheckResult:
    p = ctx.params(args)
    rng = np.random.default_rng(ctx.config.seed)
    worst, witness = 0.0, None
    for _ in range(ctx.points(args)):
        x = rng.uniform(-0.7, 0.7, 4)
        d = CH.ambient_constraint_check(CH.ambient_map(x, p.lam), p.lam)
        if d > worst:
            worst, witness = float(d), [float(v) for v in x]
    tol = ctx.tol(args, 1e-12)
    return CheckResult(worst <= tol, None if worst <= tol else {"x": witness}, worst, f"Lambda = {p.lam:g}")


def _algebra(name: str) -> N.NCAlgebra:
    return N.NCAlgebra.from_catalog(C.catalog_lookup(name))


def op_nc_jacobi(ctx: Context, args) -> CheckResult:
    return _expect(N.jacobi_nc(_algebra(args["catalog"])), args.get("expect", True), "Jacobi identity")


def op_casimir(ctx: Context, args) -> CheckResult:
    entry = C.catalog_lookup(args["catalog"])
    A = N.NCAlgebra.from_catalog(entry)
    res = N.casimir_centrality(A, A.from_expr(entry.extras[args["element"]]))
    return _expect(res, args.get("expect", True), "centrality")


def op_confluence(ctx: Context, args) -> CheckResult:
    A = _algebra(args["catalog"])
    words = N.random_words(A, int(args.get("words", 500)), int(args.get("max_len", 4)),
                           seed=ctx.config.seed)
    return N.confluence_check(A, words, seeds=(ctx.config.seed + 1, ctx.config.seed + 2))


def op_leibniz(ctx: Context, args) -> CheckResult:
    """[a, bc] = [a, b]c + b[a, c] on random words of length 1..max_len."""
    A = _algebra(args["catalog"])
    rng = random.Random(ctx.config.seed)
    max_len = int(args.get("max_len", 2))
    count = int(args.get("count", 50))
    for _ in range(count):
        ws = [tuple(rng.choice(A.generators) for _ in range(rng.randint(1, max_len))) for _ in range(3)]
        a, b, c = (N.NCPoly.word(*w) for w in ws)
        lhs = N.commutator_nc(A, a, b * c)
        rhs = A.normal_form(N.commutator_nc(A, a, b) * c + b * N.commutator_nc(A, a, c))
        if lhs != rhs:
            return CheckResult(False, {"words": [list(w) for w in ws]}, None, "Leibniz rule fails")
    return CheckResult(True, None, 0.0, f"{count} triples")


def op_poisson_jacobi(ctx: Context, args) -> CheckResult:
    entry = C.catalog_lookup(args["catalog"])
    return C.poisson_jacobi_check(entry, ctx.plan(entry, args), ctx.tol(args, 1e-8),
                                  first_order=args.get("first_order", False))


def op_antisymmetry(ctx: Context, args) -> CheckResult:
    entry = C.catalog_lookup(args["catalog"])
    return C.antisymmetry_check(entry, ctx.plan(entry, args))


def op_flat_limit(ctx: Context, args) -> CheckResult:
    curved = C.catalog_lookup(args["curved"])
    flat = C.catalog_lookup(args["flat"])
    return C.flat_limit_check(curved, flat, ctx.plan(flat, args), eta=float(args.get("eta", 1e-6)),
                              tol=ctx.tol(args, 1e-4), substitution=args.get("substitution"))


def op_superposition(ctx: Context, args) -> CheckResult:
    a, b = C.catalog_lookup(args["parts"][0]), C.catalog_lookup(args["parts"][1])
    full = C.catalog_lookup(args["full"])
    return C.superposition_check(a, b, full, ctx.plan(full, args), ctx.tol(args, 1e-9))


def op_null_plane(ctx: Context, args) -> CheckResult:
    null = C.catalog_lookup(args["null"])
    cart = C.catalog_lookup(args["cartesian"])
    return C.null_plane_check(null, cart, ctx.plan(cart, args), ctx.tol(args, 1e-9))


def _phase_space(ctx: Context, args):
    entry = C.catalog_lookup(args["catalog"])
    plan = ctx.plan(entry, args)
    return PS.DeformedPhaseSpace.from_catalog(entry, plan), plan


def op_phase_space_jacobi(ctx: Context, args) -> CheckResult:
    D, plan = _phase_space(ctx, args)
    return PS.phase_space_jacobi(D, plan, ctx.tol(args, 1e-9))


def op_darboux(ctx: Context, args) -> CheckResult:
    D, _ = _phase_space(ctx, args)
    entry = C.catalog_lookup(args["map"])
    plan = ctx.plan(entry, args)
    q, p = PS.darboux_elements(D, entry, plan)
    if args.get("identity_q"):
        q = {f"q{k}": D.y(f"y{k}") for k in (1, 2, 3)}
    res = PS.darboux_verify(D, q, p, plan, ctx.tol(args, 1e-9))
    return _expect(res, args.get("expect", True), "canonical relations")


OPERATIONS: dict[str, Callable[[Context, Mapping], CheckResult]] = {
    "mcybe": op_mcybe,
    "cocycle": op_cocycle,
    "coisotropy": op_coisotropy,
    "subgroup": op_subgroup,
    "screen-dimension": op_screen_dimension,
    "screen-member": op_screen_member,
    "first-order-space": op_first_order_space,
    "sklyanin-vs-catalog": op_sklyanin_vs_catalog,
    "pushforward-vs-catalog": op_pushforward_vs_catalog,
    "pushforward-s4-central": op_pushforward_s4_central,
    "pseudosphere": op_pseudosphere,
    "nc-jacobi": op_nc_jacobi,
    "casimir": op_casimir,
    "confluence": op_confluence,
    "leibniz": op_leibniz,
    "poisson-jacobi": op_poisson_jacobi,
    "antisymmetry": op_antisymmetry,
    "flat-limit": op_flat_limit,
    "superposition": op_superposition,
    "null-plane": op_null_plane,
    "phase-space-jacobi": op_phase_space_jacobi,
    "darboux": op_darboux,
}

_REQUIREMENTS = {
    "eta-nonzero": lambda p: p.eta != 0,
    "z-nonzero": lambda p: p.z != 0,
    "zprime-nonzero": lambda p: p.zp != 0,
}


# ---------------------------------------------------------------------------
# reports

def jsonable(x):
    """Plain JSON value for witnesses: tuples become lists, complex numbers [re, im]."""
    if x is None or isinstance(x, (bool, str)):
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        v = float(x)
        return v if math.isfinite(v) else str(v)
    if isinstance(x, (complex, np.complexfloating)):
        v = complex(x)
        return jsonable(v.real) if v.imag == 0 else [jsonable(v.real), jsonable(v.imag)]
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, Mapping):
        return {str(k): jsonable(v) for k, v in sorted(x.items(), key=lambda kv: str(kv[0]))}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [jsonable(v) for v in x]
    return str(x)


@dataclass(frozen=True)
class CheckRecord:
    name: str
    citation: str
    verdict: str
    max_deviation: float | None = None
    witness: Any = None
    detail: str = ""
    group: str = ""
    aspect: str = ""
    runtime: float | None = None

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ReportError(f"bad verdict {self.verdict!r}")

    def to_dict(self, include_runtime: bool = False) -> dict:
        d = {"name": self.name, "citation": self.citation, "verdict": self.verdict,
             "max_deviation": self.max_deviation, "witness": self.witness, "detail": self.detail,
             "group": self.group, "aspect": self.aspect}
        if include_runtime and self.runtime is not None:
            d["runtime"] = self.runtime
        return d


@dataclass(frozen=True)
class Report:
    suite: str
    config: Mapping[str, Any]
    records: tuple[CheckRecord, ...]

    def __post_init__(self):
        names = [r.name for r in self.records]
        if len(set(names)) != len(names):
            raise ReportError("a check appears twice in the report")
        object.__setattr__(self, "records", tuple(sorted(self.records, key=lambda r: r.name)))

    @property
    def summary(self) -> dict[str, int]:
        out = {v: 0 for v in VERDICTS}
        for r in self.records:
            out[r.verdict] += 1
        out["total"] = len(self.records)
        return out

    @property
    def ok(self) -> bool:
        return all(r.verdict != "fail" for r in self.records)

    def record(self, name: str) -> CheckRecord:
        for r in self.records:
            if r.name == name:
                return r
        raise KeyError(name)


def run_check(ctx: Context, spec: CheckSpec) -> CheckRecord:
    p = ctx.params(spec.args)
    unmet = [req for req in spec.requires if not _REQUIREMENTS[req](p)]
    t0 = time.perf_counter()
    if unmet:
        return CheckRecord(spec.name, spec.citation, "skip", detail=f"requires {', '.join(unmet)}",
                           group=spec.group, aspect=spec.aspect, runtime=0.0)
    try:
        res = OPERATIONS[spec.op](ctx, spec.args)
        verdict = "pass" if res.passed else "fail"
        dev = None if res.max_deviation is None else jsonable(res.max_deviation)
        witness, detail = jsonable(res.witness), res.detail
    except NCPhsError as exc:
        verdict, dev, witness, detail = "fail", None, None, f"{type(exc).__name__}: {exc}"
    return CheckRecord(spec.name, spec.citation, verdict, dev, witness, detail, spec.group, spec.aspect,
                       time.perf_counter() - t0)


def run_suite(config: SuiteConfig, checks: list[CheckSpec] | None = None) -> Report:
    """Run a registered suite (or the given check list) under ``config``."""
    if checks is None:
        suites = load_suites(config.suites_file)
        if config.suite not in suites:
            raise ConfigError(f"unknown suite {config.suite!r}; known: {sorted(suites)}")
        checks = suites[config.suite]
    for_req = [r for c in checks for r in c.requires if r not in _REQUIREMENTS]
    if for_req:
        raise ConfigError(f"unknown requirement {for_req[0]!r}")
    ctx = Context(config)
    return Report(config.suite, config.echo(), tuple(run_check(ctx, c) for c in checks))


def report_to_json(report: Report, include_runtime: bool = False) -> str:
    data = {"format": REPORT_FORMAT, "version": REPORT_VERSION, "suite": report.suite,
            "config": dict(report.config), "summary": report.summary,
            "records": [r.to_dict(include_runtime) for r in report.records]}
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def report_from_json(text: str) -> Report:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ReportError(f"report is not JSON: {exc}") from None
    if data.get("format") != REPORT_FORMAT or data.get("version") != REPORT_VERSION:
        raise ReportError("not a report file of a supported version")
    records = tuple(CheckRecord(**r) for r in data["records"])
    report = Report(data["suite"], data["config"], records)
    if report.summary != data["summary"]:
        raise ReportError("summary counts do not match the records")
    return report


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.2e}"
    return str(x).replace("|", "\\|")


def report_to_markdown(report: Report) -> str:
    s = report.summary
    lines = [f"# Verification report: {report.suite}", "",
             "Configuration: " + ", ".join(f"{k} = {v}" for k, v in report.config.items() if v is not None),
             "", f"Passed {s['pass']}, failed {s['fail']}, skipped {s['skip']} of {s['total']}.", ""]
    grouped = [r for r in report.records if r.group and r.aspect]
    if grouped:
        groups = sorted({r.group for r in grouped})
        aspects = sorted({r.aspect for r in grouped})
        cells = {(r.group, r.aspect): [] for r in grouped}
        for r in grouped:
            cells[(r.group, r.aspect)].append(r.verdict)
        lines += ["| | " + " | ".join(aspects) + " |", "|---" * (len(aspects) + 1) + "|"]
        for g in groups:
            row = []
            for a in aspects:
                vs = cells.get((g, a), [])
                row.append("" if not vs else ("fail" if "fail" in vs else "pass" if "pass" in vs else "skip"))
            lines.append(f"| {g} | " + " | ".join(row) + " |")
        lines.append("")
    lines += ["| check | verdict | max deviation | detail | citation |", "|---|---|---|---|---|"]
    for r in report.records:
        lines.append(f"| {r.name} | {r.verdict} | {_cell(r.max_deviation)} | {_cell(r.detail)} | "
                     f"{_cell(r.citation)} |")
    return "\n".join(lines) + "\n"


def export_report(report: Report, fmt: str = "json", path: str | None = None,
                  include_runtime: bool = False) -> str:
    """Render the report; write it to ``path`` when given."""
    if fmt == "json":
        text = report_to_json(report, include_runtime)
    elif fmt == "markdown":
        text = report_to_markdown(report)
    else:
        raise ReportError(f"unknown report format {fmt!r}")
    if path is not None:
        try:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise ReportError(f"cannot write report to {path}: {exc}") from None
    return text
