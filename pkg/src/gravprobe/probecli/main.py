"""Command-line entry point: ``gravprobe <subcommand> [flags]``."""
from __future__ import annotations

import argparse
import logging
import os
import sys

from ..errors import ConfigError, GridResolutionError, NumericalInconsistencyError, TruncationError
from .commands import COMMANDS
from .config import RunConfig

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3

log = logging.getLogger("gravprobe")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gravprobe",
        description="Fisher-information data for probes of a p^4 gravity correction.",
        epilog="Precedence: flags > --config file > GRAVPROBE_OUT (output dir) > defaults.",
    )
    parser.add_argument("command", choices=sorted(COMMANDS), help="artifact to produce")
    parser.add_argument("--config", metavar="PATH", help="flat key = value config file")
    parser.add_argument("--units", choices=("natural", "si"))
    parser.add_argument("--out", metavar="DIR", help="output directory")
    parser.add_argument("--format", choices=("csv", "json"))
    parser.add_argument("--workers", type=int, metavar="N")
    parser.add_argument("--seed", type=int, metavar="N")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override any config key (repeatable)")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def resolve_config(args, environ=None) -> RunConfig:
    environ = os.environ if environ is None else environ
    config = RunConfig()
    if environ.get("GRAVPROBE_OUT"):
        config = config.updated({"out": environ["GRAVPROBE_OUT"]})
    if args.config:
        config = RunConfig.from_file(args.config, base=config)
    overrides = {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    for key in ("units", "out", "format", "workers", "seed"):
        value = getattr(args, key)
        if value is not None:
            overrides[key] = str(value)
    return config.updated(overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        config = resolve_config(args)
        paths, report = COMMANDS[args.command](config)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GridResolutionError, TruncationError, NumericalInconsistencyError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    for path in paths:
        log.info("wrote %s", path)
    for rec in report.failures:
        print(f"FAIL {rec.name}: rel. error {rec.relative_error:.3e} > {rec.tolerance:.1e}",
              file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
