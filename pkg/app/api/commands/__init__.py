import argparse

from . import BoundsCommand, CertifyCommand, EnumerateCommand, RunCommand, ScanCommand


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="smc", description="Sum-of-minima-of-convex solver toolkit")
    parser.add_argument("--log-level", type=str, default=None, help="覆盖 LOG_LEVEL")
    subparsers = parser.add_subparsers(dest="command", required=True)
    RunCommand.register(subparsers)
    CertifyCommand.register(subparsers)
    ScanCommand.register(subparsers)
    EnumerateCommand.register(subparsers)
    BoundsCommand.register(subparsers)
    return parser
