"""Command line entry point.

    evodich analyze scenario.yaml
    evodich sweep sweep.yaml
    evodich selftest

Exit status: 0 when the analysis completed (whatever the verdict), 1 when a
certificate was refused or a selftest criterion failed, 2 for config errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .errors import ConfigError

EXIT_OK, EXIT_REFUSED, EXIT_CONFIG = 0, 1, 2


def _analyze(args):
    from .scenario import load_config, run_scenario, write_report

    cfg = load_config(args.config)
    if cfg["analysis"] == "sweep":
        raise ConfigError("sweep scenarios go through 'evodich sweep'", "analysis")
    output = dict(cfg["output"])
    if args.report:
        output["report"] = args.report
    report = run_scenario(cfg)
    paths = write_report(report, output)
    if not output.get("report"):
        sys.stdout.write(report.to_json(bool(output.get("timing"))))
    print(f"verdict: {report.verdict}", file=sys.stderr)
    for p in paths:
        print(f"wrote {p}", file=sys.stderr)
    return EXIT_REFUSED if report.refused else EXIT_OK


def _sweep(args):
    from .scenario import load_config, run_sweep, sweep_suffix, write_report, write_summary

    cfg = load_config(args.config)
    if cfg["analysis"] != "sweep":
        raise ConfigError("expected analysis: sweep", "analysis")
    reports, summary = run_sweep(cfg)
    keys = summary["parameters"]
    for rep, row in zip(reports, summary["table"]):
        write_report(rep, cfg["output"], sweep_suffix(row, keys))
    path = write_summary(summary, cfg["output"])
    if path is None:
        print(json.dumps(summary, indent=2))
    for row in summary["table"]:
        cells = " ".join(f"{k}={row[k]}" for k in keys)
        delta = f" delta={row['delta']:.3e}" if isinstance(row.get("delta"), float) else ""
        val = row["value"]
        val = f"{val:.6g}" if isinstance(val, float) else str(val)
        print(f"{cells} verdict={row['verdict']} value={val}{delta}", file=sys.stderr)
    return EXIT_REFUSED if any(r.refused for r in reports) else EXIT_OK


def _selftest(args):
    from .acceptance import CRITERIA, format_table, run_all, run_one

    if args.only:
        results = [run_one(i) for i in args.only if 1 <= i <= len(CRITERIA)]
    else:
        results = run_all()
    print(format_table(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_REFUSED


def build_parser():
    p = argparse.ArgumentParser(prog="evodich", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"evodich {__version__}")
    sub = p.add_subparsers(dest="verb", required=True)
    a = sub.add_parser("analyze", help="run one scenario and write its report")
    a.add_argument("config")
    a.add_argument("--report", help="override output.report")
    a.set_defaults(func=_analyze)
    s = sub.add_parser("sweep", help="run a parameter sweep")
    s.add_argument("config")
    s.set_defaults(func=_sweep)
    t = sub.add_parser("selftest", help="run the acceptance battery")
    t.add_argument("--only", type=int, nargs="+", metavar="K", help="criterion numbers (1-based)")
    t.set_defaults(func=_selftest)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
