import argparse

import numpy as np

from app.core import SolveCode
from app.model.dto.bench import BoundsConfig
from app.repository import get_result_mapper
from app.services.micp import get_micp_service
from app.services.problems import load_instance
from app.utils.logger import get_logger
from .common import add_common_arguments, load_config, output_dir

logger = get_logger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("bounds", help="计算可行集上的 S-bounds")
    add_common_arguments(parser)
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    return cmd_bounds(load_config(BoundsConfig, args))


def cmd_bounds(config: BoundsConfig) -> int:
    """bounds.json 的 M 可直接用作 vc-scan --bounds 的输入"""
    p = load_instance(config.instance).problem
    bounds, methods = get_micp_service(config.solver).bound_report(p)
    # Forbidden (-∞) 写为 null
    matrices = [[[None if np.isneginf(v) else float(v) for v in row] for row in M] for M in bounds.M]
    get_result_mapper().write_document(output_dir(config), "bounds.json", {"M": matrices, "methods": methods})
    logger.info(f"S-bounds: {p.name}, 每个 term 的矩阵大小 {bounds.sizes}")
    return SolveCode.SUCCESS
