"""Suite configuration, report export and the ncphs command."""
import json

import pytest

from ncphs import cli
from ncphs import suites as S
from ncphs.errors import ConfigError, ReportError


def write_suites(tmp_path, suites):
    path = tmp_path / "suites.json"
    path.write_text(json.dumps({"format": "ncphs-suites", "version": 1, "suites": suites}))
    return str(path)


PASSING = {"name": "classify/r0", "op": "mcybe", "args": {"rmatrix": "r0", "expect": "quasitriangular"},
           "citation": "r0 solves the modified equation"}
FAILING = {"name": "classify/r0-wrong", "op": "mcybe", "args": {"rmatrix": "r0", "expect": "triangular"},
           "citation": "deliberately wrong expectation"}
NEEDS_Z = {"name": "s4/r_I", "op": "pushforward-s4-central", "args": {"rmatrix": "r_I"},
           "citation": "s4 is central", "requires": ["z-nonzero"]}


# --- config ---------------------------------------------------------------

def test_config_validation():
    with pytest.raises(ConfigError):
        S.SuiteConfig("limits", eta=float("nan"))
    with pytest.raises(ConfigError):
        S.SuiteConfig("limits", kappa=0.0)
    with pytest.raises(ConfigError):
        S.SuiteConfig("limits", eta=0.5, lam=0.25)
    with pytest.raises(ConfigError):
        S.SuiteConfig("limits", points=0)
    with pytest.raises(ConfigError):
        S.SuiteConfig("limits", tol=-1.0)
    with pytest.raises(ConfigError):
        S.SuiteConfig("limits", format="xml")
    with pytest.raises(ConfigError):
        S.SuiteConfig.from_dict({"suite": "limits", "colour": "red"})
    assert S.SuiteConfig("limits", eta=0.5, lam=-0.25).lam == -0.25


def test_config_echo():
    assert S.SuiteConfig("limits").echo()["Lambda"] == -0.25
    e = S.SuiteConfig("limits", lam=0.25).echo()
    assert e["Lambda"] == 0.25 and e["eta"] is None
    assert S.SuiteConfig("limits", eta=0.0).echo()["Lambda"] == 0.0


def test_params_from_context():
    ctx = S.Context(S.SuiteConfig("limits", lam=0.25))
    p = ctx.params({})
    assert p.eta == 0.5j and p.lam == 0.25
    assert ctx.params({"eta": 0}).lam == 0.0
    assert ctx.params({"lam": -1.0}).eta == 1.0


def test_registered_suites():
    suites = S.load_suites()
    for name in ("bialgebra-classification", "coisotropy", "first-order", "kappa-minkowski",
                 "kappa-ads-spacetime", "lorentz-subgroup-spacetimes", "worldlines", "limits", "properties"):
        assert suites[name]
        assert all(c.citation for c in suites[name])
    names = [c.name for c in suites["all"]]
    assert len(names) == len(set(names))


def test_suite_file_errors(tmp_path):
    with pytest.raises(ConfigError, match="unknown operation"):
        S.load_suites(write_suites(tmp_path, {"s": [dict(PASSING, op="frobnicate")]}))
    with pytest.raises(ConfigError, match="repeats"):
        S.load_suites(write_suites(tmp_path, {"s": [PASSING, PASSING]}))
    with pytest.raises(ConfigError, match="differently"):
        S.load_suites(write_suites(tmp_path, {"a": [PASSING], "b": [dict(PASSING, citation="other")]}))
    with pytest.raises(ConfigError, match="missing"):
        S.load_suites(str(tmp_path / "absent.json"))
    with pytest.raises(ConfigError):
        S.run_suite(S.SuiteConfig("no-such-suite"))


# --- reports --------------------------------------------------------------

def test_report_records_and_summary(tmp_path):
    path = write_suites(tmp_path, {"mixed": [FAILING, PASSING]})
    report = S.run_suite(S.SuiteConfig("mixed", suites_file=path))
    assert [r.name for r in report.records] == ["classify/r0", "classify/r0-wrong"]
    assert report.summary == {"pass": 1, "fail": 1, "skip": 0, "total": 2}
    assert not report.ok
    assert report.record("classify/r0-wrong").verdict == "fail"


def test_report_rejects_duplicates():
    rec = S.CheckRecord("a", "c", "pass")
    with pytest.raises(ReportError):
        S.Report("s", {}, (rec, rec))
    with pytest.raises(ReportError):
        S.CheckRecord("a", "c", "maybe")


def test_json_round_trip():
    report = S.run_suite(S.SuiteConfig("bialgebra-classification"))
    full = S.report_to_json(report, include_runtime=True)
    assert S.report_from_json(full) == report
    # runtimes are left out by default; everything else survives
    text = S.report_to_json(report)
    again = S.report_from_json(text)
    assert all(r.runtime is None for r in again.records)
    assert S.report_to_json(again) == text


def test_report_loader_errors():
    with pytest.raises(ReportError):
        S.report_from_json("not json")
    report = S.run_suite(S.SuiteConfig("limits"))
    data = json.loads(S.report_to_json(report))
    data["summary"]["pass"] += 1
    with pytest.raises(ReportError):
        S.report_from_json(json.dumps(data))
    data["version"] = 9
    with pytest.raises(ReportError):
        S.report_from_json(json.dumps(data))


def test_empty_suite_gives_header_only(tmp_path):
    path = write_suites(tmp_path, {"empty": []})
    report = S.run_suite(S.SuiteConfig("empty", suites_file=path))
    assert report.summary["total"] == 0 and report.ok
    md = S.report_to_markdown(report)
    assert md.splitlines()[-1] == "|---|---|---|---|---|"
    assert json.loads(S.report_to_json(report))["records"] == []


def test_markdown_pivot_by_type():
    report = S.run_suite(S.SuiteConfig("lorentz-subgroup-spacetimes"))
    md = S.report_to_markdown(report)
    rows = [line for line in md.splitlines() if line.startswith("| type ")]
    assert [r.split(" | ")[0] for r in rows] == ["| type I", "| type II", "| type III"]
    assert "fail" not in "".join(rows)


def test_unwritable_path(tmp_path):
    report = S.run_suite(S.SuiteConfig("limits"))
    with pytest.raises(ReportError):
        S.export_report(report, "json", str(tmp_path / "missing" / "r.json"))


def test_skip_does_not_fail(tmp_path):
    path = write_suites(tmp_path, {"s": [NEEDS_Z]})
    report = S.run_suite(S.SuiteConfig("s", z=0.0, suites_file=path))
    assert report.records[0].verdict == "skip" and report.ok
    report = S.run_suite(S.SuiteConfig("s", suites_file=path))
    assert report.records[0].verdict == "pass"


def test_errors_inside_checks_become_failures(tmp_path):
    bad = dict(PASSING, name="bad", args={"rmatrix": "r_nonexistent"})
    report = S.run_suite(S.SuiteConfig("s", suites_file=write_suites(tmp_path, {"s": [bad]})))
    assert report.records[0].verdict == "fail" and "r_nonexistent" in report.records[0].detail


def test_jsonable():
    from fractions import Fraction
    assert S.jsonable({"b": (1, 2j), "a": Fraction(1, 3)}) == {"a": "1/3", "b": [1, [0.0, 2.0]]}
    assert S.jsonable(float("inf")) == "inf"


# --- command line ---------------------------------------------------------

def test_cli_deterministic(tmp_path, capsys):
    outs = []
    for k in range(2):
        out = tmp_path / f"r{k}.json"
        assert cli.main(["kappa-ads-spacetime", "--seed", "3", "--points", "20", "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    assert "11 passed" in capsys.readouterr().err


def test_cli_exit_codes(tmp_path, capsys):
    path = write_suites(tmp_path, {"good": [PASSING], "bad": [PASSING, FAILING]})
    assert cli.main(["good", "--suites-file", path]) == 0
    assert cli.main(["bad", "--suites-file", path]) == 1
    assert cli.main(["nope", "--suites-file", path]) == 2
    assert cli.main(["good", "--suites-file", path, "--eta", "nan"]) == 2
    assert cli.main(["good", "--suites-file", path, "--out", str(tmp_path / "x" / "y.json")]) == 2
    err = capsys.readouterr().err
    assert "unknown suite" in err and "cannot write" in err


def test_cli_stdout_json(capsys):
    assert cli.main(["first-order"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["summary"] == {"pass": 1, "fail": 0, "skip": 0, "total": 1}
    assert data["records"][0]["citation"]


def test_cli_config_file(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"suite": "limits", "seed": 4, "points": 30, "format": "markdown"}))
    assert cli.main(["--config", str(cfg), "--kappa", "2.0"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("# Verification report: limits")
    assert "kappa = 2.0" in out and "seed = 4" in out


def test_cli_list(capsys):
    assert cli.main(["--list"]) == 0
    out = capsys.readouterr().out
    assert "worldlines\t13 checks" in out


def test_cli_runtime_flag(tmp_path):
    out = tmp_path / "r.json"
    assert cli.main(["limits", "--runtime", "--out", str(out)]) == 0
    assert all("runtime" in r for r in json.loads(out.read_text())["records"])
