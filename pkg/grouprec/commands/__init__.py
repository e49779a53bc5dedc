"""Command-line surface: one module per pipeline stage."""
import argparse
import logging
from typing import Optional, Sequence

from pydantic import ValidationError

from ..config import LOG_LEVEL, configure_logging
from ..errors import GroupRecError
from . import evaluate, factorize, groups, recommend, run, synth

logger = logging.getLogger(__name__)

COMMANDS = (synth, factorize, groups, recommend, evaluate, run)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="grouprec", description="Consensus-based group recommendation experiments")
    parser.add_argument("--log-level", default=LOG_LEVEL, help="DEBUG, INFO, WARNING ...")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level.upper())
    try:
        return args.handler(args)
    except ValidationError as exc:
        logger.error("Invalid configuration: %s", exc)
        return 2
    except GroupRecError as exc:
        logger.error("%s failed: %s", args.command, exc)
        return exc.exit_code
