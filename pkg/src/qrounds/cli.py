"""Command-line entry point: ``qrounds run`` and ``qrounds check-all``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ConfigError

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _run(args):
    from .experiments import ExperimentConfig, run, write_outputs

    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"config error: cannot read {args.config}: {exc.strerror}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = ExperimentConfig.from_json(text, seed=args.seed)
        report = run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out or cfg.out or "."
    csv_path, json_path = write_outputs(report, out)
    summary = report.summary()
    print(f"{report.command}: {summary['pass_count']} passed, {summary['fail_count']} failed "
          f"(max violation {summary['max_violation']:.3g}) -> {csv_path}, {json_path}")
    for note in report.notes:
        print(f"note: {note}")
    if report.fail_count:
        print("failing rows:", file=sys.stderr)
        for row in report.failing_rows():
            print("  " + ", ".join(f"{c}={row.get(c)}" for c in report.columns), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def _check_all(args):
    from .acceptance import run_acceptance

    results = run_acceptance(quick=args.quick, echo=True)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def build_parser():
    parser = argparse.ArgumentParser(prog="qrounds", description="Parallel-query simulation and Fourier growth checks.")
    sub = parser.add_subparsers(dest="cmd", required=True)
    p_run = sub.add_parser("run", help="run one experiment from a JSON config")
    p_run.add_argument("--config", required=True, help="path to a JSON config")
    p_run.add_argument("--out", help="output directory (default: config 'out' or .)")
    p_run.add_argument("--seed", type=int, help="override the config seed")
    p_run.set_defaults(func=_run)
    p_check = sub.add_parser("check-all", help="run the acceptance suite")
    p_check.add_argument("--quick", action="store_true", help="reduced trial counts")
    p_check.set_defaults(func=_check_all)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
