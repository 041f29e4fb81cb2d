"""Command-line front end: ``nkgeom verify|classify|sweep|report|list-fixtures|list-suites``.

Exit codes: 0 when every check passes, 1 when a numerical check fails
(the failing checks are named on stderr), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import sys

from .errors import UnknownFixtureError
from .fixtures import fixture_names, get_fixture
from .suites import (
    SUITE_HELP,
    SUITES,
    UsageError,
    report_csv,
    report_json,
    run_suite,
    sweep_csv,
    sweep_case1_family,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULT_BATTERY = (
    ("curvature-core", "round_sphere_5"),
    ("theorem1", "case1_cylinder"),
    ("gh-classify", "s6_octonion_nk"),
    ("gh-classify", "flat_c3_kahler"),
    ("cone-chain", "s5_sasaki"),
    ("theorem4", "s5_sasaki"),
)

SWEEP_TOL = 1e-5


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _pair(text):
    suite, sep, fixture = text.partition(":")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected SUITE:FIXTURE, got {text!r}")
    return suite, fixture


def build_parser():
    p = _Parser(prog="nkgeom", description="Run numerical verification suites over named fixtures.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", help="run one suite on one fixture and print a JSON report")
    v.add_argument("suite")
    v.add_argument("fixture")
    v.add_argument("--samples", type=int, default=20)
    v.add_argument("--tol", type=float, default=None, help="override every check tolerance")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--timing", action="store_true", help="record wall time (breaks byte-stability)")
    v.add_argument("--out", default=None, help="write the report here instead of stdout")

    c = sub.add_parser("classify", help="shorthand for 'verify gh-classify FIXTURE'")
    c.add_argument("fixture")
    c.add_argument("--samples", type=int, default=20)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", default=None)

    s = sub.add_parser("sweep", help="Einstein check across a grid of rescaled cylinders")
    s.add_argument("family", choices=["theorem1"])
    s.add_argument("--beta", type=_float_list, default=[1.0])
    s.add_argument("--gamma", type=_float_list, default=[0.0])
    s.add_argument("--r", type=_float_list, default=[5.0])
    s.add_argument("--fixture", default="round_sphere_5")
    s.add_argument("--base-scale", type=float, default=None,
                   help="multiply the base metric by this factor instead of matching beta")
    s.add_argument("--samples", type=int, default=20)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default=None)

    r = sub.add_parser("report", help="run a battery of suites and write one report")
    r.add_argument("--format", choices=["json", "csv"], default="json")
    r.add_argument("--out", required=True)
    r.add_argument("--run", type=_pair, action="append", default=None, metavar="SUITE:FIXTURE")
    r.add_argument("--samples", type=int, default=20)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--tol", type=float, default=None)
    r.add_argument("--timing", action="store_true")

    sub.add_parser("list-fixtures", help="print registered fixtures")
    sub.add_parser("list-suites", help="print available suites")
    return p


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {out}: {exc}")


def _report_failures(results):
    bad = False
    for res in results:
        for name in res.failed:
            print(f"FAIL {res.suite} {res.fixture}: {name}", file=sys.stderr)
            bad = True
    return EXIT_FAIL if bad else EXIT_OK


def _cmd_verify(a):
    res = run_suite(a.suite, a.fixture, a.samples, a.seed, a.tol, a.timing)
    _emit(report_json([res], a.seed), a.out)
    return _report_failures([res])


def _cmd_classify(a):
    res = run_suite("gh-classify", a.fixture, a.samples, a.seed)
    _emit(report_json([res], a.seed), a.out)
    print(f"{a.fixture}: {{{', '.join(res.info.get('gh_type', []))}}}", file=sys.stderr)
    return _report_failures([res])


def _cmd_sweep(a):
    rows = sweep_case1_family(a.fixture, a.beta, a.gamma, a.r, a.samples, a.seed, a.base_scale)
    _emit(sweep_csv(rows), a.out)
    code = EXIT_OK
    for beta, gamma, r, _, res in rows:
        if not res <= SWEEP_TOL:
            print(f"FAIL sweep beta={beta:g} gamma={gamma:g} r={r:g}: max_residual {res:.3g}",
                  file=sys.stderr)
            code = EXIT_FAIL
    return code


def _cmd_report(a):
    runs = a.run or list(DEFAULT_BATTERY)
    results = [run_suite(s, f, a.samples, a.seed, a.tol, a.timing) for s, f in runs]
    text = report_json(results, a.seed) if a.format == "json" else report_csv(results)
    _emit(text, a.out)
    return _report_failures(results)


def _cmd_list_fixtures(a):
    for name in fixture_names():
        e = get_fixture(name)
        print(f"{name}\t{e.metric.dim}\t{e.description}")
    return EXIT_OK


def _cmd_list_suites(a):
    for name in SUITES:
        print(f"{name}\t{SUITE_HELP[name]}")
    return EXIT_OK


COMMANDS = {
    "verify": _cmd_verify,
    "classify": _cmd_classify,
    "sweep": _cmd_sweep,
    "report": _cmd_report,
    "list-fixtures": _cmd_list_fixtures,
    "list-suites": _cmd_list_suites,
}


def main(argv=None) -> int:
    try:
        a = build_parser().parse_args(argv)
        return COMMANDS[a.command](a)
    except (UsageError, UnknownFixtureError) as exc:
        msg = exc.args[0] if exc.args else str(exc)
        print(f"nkgeom: error: {msg}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
