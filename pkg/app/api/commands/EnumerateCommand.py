import argparse

from app.core import SolveCode
from app.model.common import Result
from app.model.dto.bench import EnumerateConfig
from app.model.dto.solver import Budget
from app.repository import get_result_mapper
from app.services.micp import get_micp_service, model_stats
from app.services.problems import load_instance
from app.services.smc import get_smc_service
from app.utils.logger import get_logger
from .common import add_common_arguments, load_config, output_dir

logger = get_logger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("enumerate", help="枚举全部 selection 求全局最优")
    add_common_arguments(parser)
    parser.add_argument("--cap", type=int, default=None, help="selection 个数上限")
    parser.add_argument("--workers", type=int, default=None, help="并发线程数")
    parser.add_argument("--micp", action="store_true", help="同时求解全局 big-M 模型")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    config = load_config(EnumerateConfig, args, cap=args.cap, workers=args.workers, micp=args.micp or None)
    return cmd_enumerate(config)


def cmd_enumerate(config: EnumerateConfig) -> int:
    p = load_instance(config.instance).problem
    out = output_dir(config)
    result = get_smc_service(config.solver).enumerate_global(p, cap=config.cap, workers=config.workers)
    mapper = get_result_mapper()
    mapper.write_document(out, "enumeration.json", Result.success({
        "F_star": result.value,
        "x_star": result.x.tolist(),
        "sigma_star": list(result.sigma),
        "optimal_selections": [list(sigma) for sigma in result.optimal_selections],
        "pieces": result.pieces,
    }))
    if config.micp:
        service = get_micp_service(config.solver, config.workers)
        model = service.build_global_model(p, service.auto_sbounds(p))
        micp = service.solve_micp(model, Budget(time_limit=config.time_limit, node_cap=config.node_cap))
        data = {
            "status": micp.status.value,
            "value": micp.value,
            "x": None if micp.x is None else micp.x.tolist(),
            "selection": None if micp.selection is None else list(micp.selection),
            "nodes": micp.nodes,
            "stats": model_stats(model).model_dump(),
        }
        if micp.x is None:
            document = Result.failure(msg=f"big-M 模型无解: {micp.status.value}", data=data)
        else:
            document = Result.success(data)
        mapper.write_document(out, "micp.json", document)
        logger.info(f"big-M 模型: {micp.status.value}, 值 {micp.value}, 枚举 F* = {result.value:.10g}")
    return SolveCode.SUCCESS
