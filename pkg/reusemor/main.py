from __future__ import annotations

import argparse
import logging
import sys

from reusemor import __version__
from reusemor.cli.commands import airga, birka, gen, qbihomm, spai_bench
from reusemor.core.config import configure_logging, get_settings
from reusemor.core.errors import ReuseMorError


logger = logging.getLogger("reusemor")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reusemor",
        description="Model order reduction with reusable sparse approximate inverse preconditioners.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("--quiet", action="store_true", help="warnings and errors only")

    subparsers = parser.add_subparsers(dest="command", required=True)
    airga.register(subparsers)
    birka.register(subparsers)
    qbihomm.register(subparsers)
    spai_bench.register(subparsers)
    gen.register(subparsers)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        level = get_settings().log_level
        if args.verbose:
            level = "DEBUG"
        elif args.quiet:
            level = "WARNING"
        configure_logging(level)
        return int(args.func(args))
    except ReuseMorError as e:
        logger.error(str(e))
        return e.exit_code
    except KeyboardInterrupt:
        logger.error("interrupted")
        return 130


if __name__ == "__main__":
    sys.exit(main())
