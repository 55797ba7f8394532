"""Command line entry point: ``hilbundle run`` and ``hilbundle list-scenarios``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import SCENARIOS, ConfigError, build_config, load_document
from .report import emit_plotdata, write_report
from .scenarios import run

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hilbundle", description="Frame-bundle verification scenarios.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run one scenario and write its report")
    r.add_argument("--scenario", required=True, help="scenario name, see list-scenarios")
    r.add_argument("--config", help="JSON config document")
    r.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config field")
    r.add_argument("--out", help="output directory (overrides the config's out field)")
    r.add_argument("--quiet", action="store_true", help="only print the overall verdict")
    sub.add_parser("list-scenarios", help="print the available scenario names")
    return p


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "list-scenarios":
        print("\n".join(SCENARIOS))
        return EXIT_OK

    overrides = list(args.set)
    if args.out is not None:
        overrides.append(f"out={args.out}")
    try:
        if args.scenario not in SCENARIOS:
            raise ConfigError([("scenario", f"unknown scenario {args.scenario!r}; choose from {', '.join(SCENARIOS)}")])
        cfg = build_config(args.scenario, load_document(args.config), overrides)
    except ConfigError as exc:
        for key, msg in exc.problems:
            print(f"config error: {key}: {msg}", file=sys.stderr)
        return EXIT_USAGE

    outcome = run(cfg)
    report = outcome.report
    out = Path(cfg.out)
    try:
        emit_plotdata(report, outcome.trace, out, outcome.plots)
        path = write_report(report, out / f"{cfg.scenario}_report.json")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    print(report.summary() if not args.quiet else f"{cfg.scenario}: {'PASS' if report.passed else 'FAIL'}")
    print(f"report written to {path}")
    return EXIT_OK if report.passed else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
