import argparse
import itertools

import numpy as np

from app.core import SolveCode
from app.handler.exception_handlers import BadDimsException
from app.model.dto.bench import ScanConfig
from app.repository import get_instance_mapper, get_result_mapper
from app.services.micp import get_micp_service, value_function
from app.services.problems import load_instance
from app.services.smc import objective
from app.utils.logger import get_logger
from .common import add_common_arguments, load_config, output_dir

logger = get_logger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("vc-scan", help="在网格上计算 V_C")
    add_common_arguments(parser)
    parser.add_argument("--c-grid", type=float, nargs="+", default=None, help="C 的取值")
    parser.add_argument("--num", type=int, default=None, help="每一维的网格点数")
    parser.add_argument("--bounds", type=str, default=None, help="S-bounds JSON")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    config = load_config(ScanConfig, args, c_grid=args.c_grid, num=args.num, bounds=args.bounds)
    return cmd_vc_scan(config)


def cmd_vc_scan(config: ScanConfig) -> int:
    """输出列 C, x0[, x1], V, F; 行数 = |C 网格| × |x 网格|"""
    p = load_instance(config.instance).problem
    if p.dim > 2:
        raise BadDimsException(f"vc-scan 只支持 1 维或 2 维实例, 实际 d = {p.dim}")
    if config.bounds:
        bounds = get_instance_mapper().load_bounds(config.bounds)
    else:
        bounds = get_micp_service(config.solver).auto_sbounds(p)
    box_lo, box_hi = p.X.bounding_box()
    lo = np.asarray(config.lo, dtype=float) if config.lo is not None else box_lo
    hi = np.asarray(config.hi, dtype=float) if config.hi is not None else box_hi
    if lo.shape != (p.dim,) or hi.shape != (p.dim,) or not np.all(np.isfinite(lo)) or not np.all(np.isfinite(hi)):
        raise BadDimsException("网格范围必须有限且与实例维度一致")
    axes = [np.linspace(lo[i], hi[i], config.num) for i in range(p.dim)]

    rows = []
    for C in config.c_grid:
        for point in itertools.product(*axes):
            x = np.array(point)
            if not p.X.contains(x):
                continue
            row = {"C": C, **{f"x{i}": v for i, v in enumerate(point)}}
            row["V"] = value_function(p, bounds, C, x)
            row["F"] = objective(p, x)
            rows.append(row)
    get_result_mapper().write_table(output_dir(config), "vc_scan.csv", rows)
    logger.info(f"vc-scan: {len(config.c_grid)} 个 C, {len(rows)} 行")
    return SolveCode.SUCCESS
