"""
krigmix - Bayesian kriging by iterative normal-mixture importance sampling
Command-line entry point
"""
import argparse
import sys
from typing import List, Optional

from loguru import logger
from pydantic import ValidationError

from . import __version__
from .commands import SUBCOMMANDS
from .core.config import settings
from .core.errors import KrigError


def configure_logging(level: str):
    # stderr only; stdout carries `diagnose` output
    logger.remove()
    logger.add(sys.stderr, level=level)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=settings.PROJECT_NAME,
        description="Bayesian kriging posterior inference and conditional simulation",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="overrides KRIG_LOG_LEVEL")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in SUBCOMMANDS:
        command.add_parser(subparsers)
    return parser


def _one_line(error: Exception) -> str:
    return " ".join(str(error).split())


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level or settings.LOG_LEVEL)
    try:
        return args.handler(args)
    except (KrigError, ValidationError) as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {type(e).__name__}: {_one_line(e)}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
