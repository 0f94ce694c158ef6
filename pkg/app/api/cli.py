from typing import Sequence

from app.api.commands import build_parser
from app.handler.exception_handlers import cli_exception_handler
from app.utils.logger import setup_logging


@cli_exception_handler
def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.log_level:
        setup_logging(args.log_level)
    return args.handler(args)
