"""Command line entry point: ``pettykit list`` and ``pettykit run``."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import tempfile
import time

from . import __version__
from .config import ExperimentConfig, load_config
from .errors import PettyKitError
from .suites import SUITES, run_suite

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

log = logging.getLogger("pettykit")


def list_suites():
    lines = []
    for name, info in SUITES.items():
        tol = ", ".join(f"{k}={v:g}" for k, v in info.tolerances.items())
        lines.append(f"{name:18s} {info.verifies}\n{'':18s} tolerances: {tol}")
    return "\n".join(lines)


def _write_atomic(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".pettykit-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_profiles(csv_dir, suite, profiles):
    os.makedirs(csv_dir, exist_ok=True)
    paths = []
    for name, (header, rows) in profiles.items():
        path = os.path.join(csv_dir, f"{suite}-{name}.csv")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)
        paths.append(path)
    return paths


def build_report(cfg, merged, tol, outcome, wall):
    return {
        "suite": cfg.suite,
        "toolkit_version": __version__,
        "seed": cfg.seed,
        "config": {"params": merged, "tolerances": tol},
        "cases": [c.to_dict() for c in outcome.cases],
        "passed": outcome.passed,
        "n_cases": len(outcome.cases),
        "n_failed": sum(not c.passed for c in outcome.cases),
        "wall_time_s": wall,
    }


def run(cfg, samples_scale=1.0):
    """Run one configured suite and return the report dictionary."""
    start = time.perf_counter()
    merged, tol, outcome = run_suite(cfg.suite, cfg.params, cfg.tolerances, cfg.seed, samples_scale, cfg.base_dir)
    from .suites import _jsonable

    report = _jsonable(build_report(cfg, merged, tol, outcome, time.perf_counter() - start))
    return report, outcome


def _parser():
    p = argparse.ArgumentParser(prog="pettykit", description="Convex-geometry verification harness.")
    p.add_argument("--version", action="version", version=f"pettykit {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="list suites, what they verify and their default tolerances")
    r = sub.add_parser("run", help="run a suite and write a JSON report")
    src = r.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="YAML/JSON experiment config")
    src.add_argument("--suite", choices=sorted(SUITES), help="run a suite with its defaults")
    r.add_argument("--seed", type=int, help="override the config seed")
    r.add_argument("--out", help="report path (default: config 'output' or <suite>-report.json)")
    r.add_argument("--csv-dir", help="directory for plot-ready CSV profiles")
    r.add_argument("--samples-scale", type=float, default=1.0, help="multiplier for Monte-Carlo budgets")
    r.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE", help="override a tolerance")
    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if args.command == "list":
        print(list_suites())
        return EXIT_PASS
    try:
        if args.samples_scale <= 0:
            raise ValueError("--samples-scale must be positive")
        cfg = load_config(args.config) if args.config else ExperimentConfig(args.suite, 0)
        if args.seed is not None:
            if args.seed < 0:
                raise ValueError("--seed must be nonnegative")
            cfg.seed = args.seed
        for item in args.tol:
            key, _, val = item.partition("=")
            cfg.tolerances[key] = float(val)
        report, outcome = run(cfg, args.samples_scale)
    except (PettyKitError, ValueError, TypeError, KeyError, ArithmeticError, OSError) as exc:
        print(f"pettykit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = args.out or cfg.output or f"{cfg.suite}-report.json"
    _write_atomic(out, json.dumps(report, indent=2, sort_keys=True) + "\n")
    csv_dir = args.csv_dir or cfg.csv_dir
    if csv_dir and outcome.profiles:
        _write_profiles(csv_dir, cfg.suite, outcome.profiles)
    status = "PASS" if report["passed"] else "FAIL"
    print(f"{cfg.suite}: {status} ({report['n_cases'] - report['n_failed']}/{report['n_cases']} cases) -> {out}")
    return EXIT_PASS if report["passed"] else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
