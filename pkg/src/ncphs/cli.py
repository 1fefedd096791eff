"""Command-line front end: ``ncphs SUITE [options]``.

Exit status is 0 when no check fails, 1 when some check fails and 2 on a
configuration or I/O error.
"""
from __future__ import annotations

import argparse
import sys

from .errors import NCPhsError
from .suites import SuiteConfig, export_report, load_suites, run_suite


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ncphs", description="Run verification suites for noncommutative "
                                "spacetimes and spaces of worldlines.")
    p.add_argument("suite", nargs="?", help="suite name (see --list)")
    p.add_argument("--list", action="store_true", help="list registered suites and exit")
    p.add_argument("--config", help="JSON file with SuiteConfig fields; flags override it")
    p.add_argument("--suites-file", dest="suites_file", help="alternative suite definition file")
    p.add_argument("--eta", type=float, help="curvature parameter, Lambda = -eta**2")
    p.add_argument("--lambda", dest="lam", type=float, help="cosmological constant (instead of --eta)")
    p.add_argument("--kappa", type=float)
    p.add_argument("--z", type=float)
    p.add_argument("--zprime", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--points", type=int, help="sample points per numeric check")
    p.add_argument("--tol", type=float, help="override every numeric tolerance")
    p.add_argument("--format", choices=("json", "markdown"))
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--runtime", dest="include_runtime", action="store_true", default=None,
                   help="include per-check runtimes in JSON (breaks byte-identical output)")
    return p


_FIELDS = ("suite", "suites_file", "eta", "lam", "kappa", "z", "zprime", "seed", "points", "tol",
           "format", "out", "include_runtime")


def config_from_args(ns: argparse.Namespace) -> SuiteConfig:
    given = {k: getattr(ns, k) for k in _FIELDS if getattr(ns, k) is not None}
    if ns.config:
        return SuiteConfig.from_file(ns.config, **given)
    return SuiteConfig.from_dict(given)


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        if ns.list:
            for name, checks in sorted(load_suites(ns.suites_file).items()):
                print(f"{name}\t{len(checks)} checks")
            return 0
        if ns.suite is None and not ns.config:
            parser.error("a suite name or --config is required")
        config = config_from_args(ns)
        report = run_suite(config)
        text = export_report(report, config.format, config.out, config.include_runtime)
    except NCPhsError as exc:
        print(f"ncphs: error: {exc}", file=sys.stderr)
        return 2
    if config.out is None:
        sys.stdout.write(text)
    s = report.summary
    print(f"{report.suite}: {s['pass']} passed, {s['fail']} failed, {s['skip']} skipped", file=sys.stderr)
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
