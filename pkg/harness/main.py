"""rgmis harness — command-line entry point and subcommand registration."""

import argparse
import sys

from dotenv import load_dotenv

load_dotenv()

from config import Config
from commands import consistency, gen, report, verify
from errors import ClaimViolation, HarnessError
from logging_config import bind_run, configure_logging, get_logger

logger = get_logger(__name__)


def _common_flags() -> argparse.ArgumentParser:
    # SUPPRESS keeps an absent flag from overwriting one given before the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="master seed (64-bit unsigned)")
    common.add_argument("--trials", type=int, default=argparse.SUPPRESS, help="permutations to sample")
    common.add_argument(
        "--exhaustive-bound", type=int, default=argparse.SUPPRESS,
        help=f"largest n for all-permutation modes (default {Config.EXHAUSTIVE_BOUND})",
    )
    common.add_argument("--out", default=argparse.SUPPRESS, help="write the report here instead of stdout")
    common.add_argument("--format", choices=Config.REPORT_FORMATS, default=argparse.SUPPRESS)
    common.add_argument("--config", default=argparse.SUPPRESS, help="JSON experiment config; flags win")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(
        prog="rgmis",
        description="Randomized greedy MIS engines and empirical checks of their query-path analysis.",
        parents=[common],
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for module in (gen, verify, consistency, report):
        module.register(subparsers, [common])
    return parser


def main(argv=None) -> int:
    configure_logging()
    Config.validate()
    args = build_parser().parse_args(argv)
    bind_run(command=args.command)
    try:
        return args.handler(args)
    except ClaimViolation as exc:
        logger.error("claim.violated", detail=exc.detail)
        print(f"claim violated: {exc.detail}", file=sys.stderr)
        for line in exc.witness:
            print(f"  {line}", file=sys.stderr)
        return exc.exit_code
    except HarnessError as exc:
        logger.error("command.failed", error=exc.detail, exit_code=exc.exit_code)
        print(f"error: {exc.detail}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
