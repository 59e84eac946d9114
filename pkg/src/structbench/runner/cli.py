"""Command line: ``structbench run|validate|report --config <path>``."""

from __future__ import annotations

import argparse
import os
import sys

from .config import ConfigError, parse_config
from .execute import execute, print_report, results_root
from .plan import STAGES, plan


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="structbench", description="Benchmark structure-learning algorithms.")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="plan and execute a config")
    run.add_argument("--config", required=True)
    run.add_argument("--cores", type=int, default=os.cpu_count() or 1)
    run.add_argument("--results-dir", help="results root (default: $BENCHPRESS_RESULTS or ./results)")
    run.add_argument("--verbose", "-v", action="store_true", help="print one line per job")

    val = sub.add_parser("validate", help="parse and plan only")
    val.add_argument("--config", required=True)

    rep = sub.add_parser("report", help="re-emit evaluation CSV/SVG files from cached results")
    rep.add_argument("--config", required=True)
    rep.add_argument("--results-dir", help="results root (default: $BENCHPRESS_RESULTS or ./results)")
    return ap


def _load(path):
    cfg = parse_config(path)
    return cfg, plan(cfg)


def main(argv=None) -> int:
    ap = _parser()
    args = ap.parse_args(argv)
    try:
        cfg, jobs = _load(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.command == "validate":
        counts = ", ".join(f"{jobs.count(s)} {s}" for s in STAGES)
        print(f"{args.config}: valid; {len(cfg.setups)} data setup(s), {len(jobs.jobs)} jobs ({counts})")
        return 0

    if args.command == "run":
        if args.cores < 1:
            ap.error("--cores must be at least 1")
        log = (lambda m: print(m, file=sys.stderr)) if args.verbose else None
        report = execute(jobs, results_root(args.results_dir), cores=args.cores, log=log)
    else:
        evals = {k for k in jobs.order if jobs.jobs[k].stage == "evaluation"}
        report = execute(jobs, results_root(args.results_dir), cores=1, force=evals, only_cached=True)
    print_report(report)
    return 1 if report.failed else 0


if __name__ == "__main__":
    sys.exit(main())
