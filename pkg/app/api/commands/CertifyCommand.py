import argparse

import numpy as np

from app.core import SolveCode
from app.handler.exception_handlers import ConfigException, DimensionMismatchException
from app.model.common import Result
from app.model.dto.bench import CertifyConfig
from app.model.dto.solver import Budget
from app.model.field_enum import CertifyStatus
from app.model.vo.verdict import RestartReport
from app.repository import get_result_mapper
from app.services.local import get_ram_service, sample_weights, start_streams
from app.services.micp import get_micp_service
from app.services.problems import (
    LoadedInstance,
    box_neighbourhood,
    load_instance,
    plr_local_sbounds,
    plr_neighbourhood,
    rfl_local_sbounds,
    rfl_neighbourhood,
)
from app.services.smc import objective
from app.utils.logger import get_logger
from .common import add_common_arguments, load_config, output_dir

logger = get_logger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("certify", help="局部最优性验证与重启")
    add_common_arguments(parser)
    parser.add_argument("--x-hat", type=float, nargs="+", default=None, help="候选点")
    parser.add_argument("--neighbourhood", choices=["box", "plr", "rfl"], default=None)
    parser.add_argument("--radius", type=float, default=None, help="plr 的 R 或 rfl 的 R∞")
    parser.add_argument("--below", type=float, default=None, help="box 邻域的下侧宽度")
    parser.add_argument("--above", type=float, default=None, help="box 邻域的上侧宽度")
    parser.add_argument("--no-restart", action="store_true", help="只做一次 certify")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    neighbourhood = {k: v for k, v in {"kind": args.neighbourhood, "radius": args.radius,
                                       "below": args.below, "above": args.above}.items() if v is not None}
    config = load_config(CertifyConfig, args, x_hat=args.x_hat, restart=False if args.no_restart else None)
    if neighbourhood:
        config = CertifyConfig.model_validate({**config.model_dump(),
                                               "neighbourhood": {**config.neighbourhood.model_dump(), **neighbourhood}})
    return cmd_certify(config)


def _factories(config: CertifyConfig, loaded: LoadedInstance):
    spec = config.neighbourhood
    match spec.kind:
        case "box":
            return (lambda x: box_neighbourhood(x, spec.below, spec.above)), None
        case "plr":
            if loaded.plr is None:
                raise ConfigException("plr 邻域只适用于 PLR 实例")
            return (lambda x: plr_neighbourhood(loaded.plr, x, spec.radius),
                    lambda x: plr_local_sbounds(loaded.plr, x, spec.radius))
        case "rfl":
            if loaded.rfl is None:
                raise ConfigException("rfl 邻域只适用于 RFL 实例")
            return (lambda x: rfl_neighbourhood(loaded.rfl, x, spec.radius),
                    lambda x: rfl_local_sbounds(loaded.rfl, x, spec.radius))
    raise ConfigException(f"未知的邻域类型: {spec.kind}")


def _initial_point(config: CertifyConfig, loaded: LoadedInstance) -> np.ndarray:
    p = loaded.problem
    if config.x_hat is not None:
        x_hat = np.asarray(config.x_hat, dtype=float)
        if x_hat.shape != (p.dim,):
            raise DimensionMismatchException(f"x̂ 的维度 {x_hat.shape[0]} != {p.dim}")
        if not p.X.contains(x_hat):
            raise ConfigException("x̂ 不在可行集内")
        return x_hat
    init_rng, run_rng = start_streams(config.seed, 0)
    trace = get_ram_service(config.solver).run(p, sample_weights(p.sizes, init_rng),
                                               config.method.resolved_schedule(), config.delta, config.k_max,
                                               rng=run_rng, start=0, seed=config.seed)
    logger.info(f"局部搜索给出 x̂, F = {trace.best_value:.10g}")
    return trace.best_x


def cmd_certify(config: CertifyConfig) -> int:
    loaded = load_instance(config.instance)
    p = loaded.problem
    x_hat = _initial_point(config, loaded)
    neighbourhood, local_bounds = _factories(config, loaded)
    budget = Budget(time_limit=config.time_limit, node_cap=config.node_cap)
    service = get_micp_service(config.solver)

    if config.restart:
        report = service.certify_and_restart(
            p, x_hat, neighbourhood, schedule=config.method.resolved_schedule(), local_bounds=local_bounds,
            rho=config.rho, delta_glob=config.delta_glob, budget=budget, max_restarts=config.max_restarts,
            delta=config.delta, k_max=config.k_max, seed=config.seed,
        )
    else:
        bounds = local_bounds(x_hat) if local_bounds is not None else None
        verdict = service.certify_or_improve(p, x_hat, config.rho, neighbourhood(x_hat), config.delta_glob,
                                             budget, bounds)
        final_x = verdict.x if verdict.status == CertifyStatus.IMPROVED else x_hat
        initial, final = objective(p, x_hat), objective(p, final_x)
        report = RestartReport(initial_value=initial, final_value=final, final_x=final_x, restarts=0,
                               enhancement_pct=100.0 * (initial - final) / max(abs(initial), 1e-12),
                               verdicts=[verdict])

    out = output_dir(config)
    get_result_mapper().write_document(out, "verdict.json", Result[RestartReport].success(report))
    last = report.verdicts[-1].status.value if report.verdicts else "none"
    logger.info(f"certify 结束: {last}, 重启 {report.restarts} 次, F {report.initial_value:.10g} → "
                f"{report.final_value:.10g} (提升 {report.enhancement_pct:.4g}%)")
    return SolveCode.SUCCESS
