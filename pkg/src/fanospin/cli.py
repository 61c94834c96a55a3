"""Command-line entry point.

Usage: ``fanospin <command> --config <path> --out <dir> [--override key=value ...]``

Exit code 0 on success; nonzero with a single-line machine-parseable error on
stderr otherwise.
"""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, apply_override, parse_config_text, resolve_config
from .io import COMMANDS, CommandError, run_command


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fanospin",
        description="Coupled spin-ensemble response simulator and analysis toolkit",
    )
    parser.add_argument("command", choices=COMMANDS, help="analysis to run")
    parser.add_argument("--config", default=None,
                        help="JSON config file; omit to run the embedded reference profile")
    parser.add_argument("--out", default=None, help="output directory (default from config)")
    parser.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config value by dotted path (repeatable)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config is not None:
            with open(args.config, encoding="utf-8") as fh:
                user = parse_config_text(fh.read())
        else:
            user = {}
        for assignment in args.override:
            apply_override(user, assignment)
        if args.out is not None:
            user.setdefault("output", {})["directory"] = args.out
        cfg = resolve_config(user)
        envelope = run_command(args.command, cfg)
    except (ConfigError, CommandError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(f"{envelope.command}: wrote {envelope.outputs['csv']} and {envelope.outputs['summary']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
