import argparse
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from app.core import SolveCode
from app.handler.exception_handlers import SmcException
from app.model.dto.bench import BenchConfig, MethodSpec
from app.model.entity.problem import SmcProblem, WeightedSubproblem
from app.model.field_enum import MethodName, Termination
from app.model.vo.trace import TRACE_SCHEMA_VERSION, RunTrace
from app.repository import get_result_mapper
from app.repository.result import RESULTS_SCHEMA_VERSION
from app.services.local import get_dca_service, get_ram_service, sample_weights, start_streams
from app.services.problems import load_instance
from app.services.smc import get_smc_service
from app.utils.logger import get_logger
from .common import add_common_arguments, load_config, output_dir

logger = get_logger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("run", help="多起点局部搜索基准测试")
    add_common_arguments(parser)
    parser.add_argument("--methods", nargs="+", default=None, help="am / bb / sm / mm / alter / dca")
    parser.add_argument("--starts", type=int, default=None, help="每个方法的起点数")
    parser.add_argument("--workers", type=int, default=None, help="并发线程数")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    methods = [{"name": m} for m in args.methods] if args.methods else None
    config = load_config(BenchConfig, args, methods=methods, starts=args.starts, workers=args.workers)
    return cmd_run(config)


def _run_one(p: SmcProblem, config: BenchConfig, method: MethodSpec, start: int) -> tuple[RunTrace, float]:
    """起点权重与 SM 扰动来自 (seed, start) 派生的两条独立随机流"""
    init_rng, run_rng = start_streams(config.seed, start)
    weights = sample_weights(p.sizes, init_rng)
    tic = time.perf_counter()
    if method.name == MethodName.DCA:
        dca = get_dca_service(config.solver)
        x_init, _ = dca.solver.solve_convex(WeightedSubproblem(problem=p, weights=weights))
        trace = dca.run(p, x_init, config.delta, config.k_max, start=start, seed=config.seed)
    else:
        trace = get_ram_service(config.solver).run(p, weights, method.resolved_schedule(), config.delta,
                                                   config.k_max, rng=run_rng, start=start, seed=config.seed)
    return trace, time.perf_counter() - tic


def cmd_run(config: BenchConfig) -> int:
    """
    每个 (method, start) 一行结果; 失败的任务记为 error 行, 子问题求解失败的轨迹照常写出,
    两者都计入失败, 存在失败时退出码非零
    """
    loaded = load_instance(config.instance)
    p = loaded.problem
    out = output_dir(config)
    mapper = get_result_mapper()

    enumeration_value = None
    if p.n_pieces <= config.enumeration_cap:
        try:
            enumeration_value = get_smc_service(config.solver).enumerate_global(p, cap=config.enumeration_cap).value
        except SmcException as exc:
            logger.warning(f"枚举参考值不可用: {exc.msg}")

    jobs = [(method, start) for method in config.methods for start in range(config.starts)]
    logger.info(f"实例 {p.name}: d = {p.dim}, N = {p.N}, 共 {len(jobs)} 个任务, {config.workers} 个线程")

    def job(item):
        method, start = item
        try:
            return _run_one(p, config, method, start), None
        except Exception as exc:
            logger.error(f"[{method.name.value}#{start}] 失败: {exc}", exc_info=True)
            return None, exc

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(job, jobs))
    else:
        outcomes = [job(item) for item in jobs]

    rows, timings, failures = [], [], 0
    for (method, start), (result, error) in zip(jobs, outcomes):
        name = method.resolved_schedule().name if method.name != MethodName.DCA else "dca"
        if error is not None:
            failures += 1
            rows.append({"method": name, "start": start, "seed": config.seed, "best_value": np.nan,
                         "best_k": None, "iterations": 0, "termination": "error",
                         "enumeration_value": enumeration_value})
            continue
        trace, elapsed = result
        if trace.termination == Termination.SOLVER_ERROR:
            failures += 1
            logger.error(f"[{name}#{start}] 子问题求解失败, 第 {trace.iterations} 轮终止")
        mapper.write_trace(out, trace)
        rows.append({"method": name, "start": start, "seed": config.seed, "best_value": trace.best_value,
                     "best_k": trace.best_k, "iterations": trace.iterations,
                     "termination": trace.termination.value, "enumeration_value": enumeration_value})
        timings.append({"method": name, "start": start, "time_s": elapsed})

    summary = mapper.write_results(out, rows)
    mapper.write_timings(out, timings)
    mapper.write_document(out, "metadata.json", {
        "results_schema": RESULTS_SCHEMA_VERSION,
        "trace_schema": TRACE_SCHEMA_VERSION,
        "instance": p.name,
        "seed": config.seed,
        "config": config.model_dump(mode="json"),
    })
    for row in summary.itertuples(index=False):
        logger.info(f"{row.method}: runs = {row.runs}, min = {row.min_value:.6g}, "
                    f"avg = {row.avg_value:.6g}, med = {row.med_value:.6g}")
    if failures:
        logger.error(f"{failures} 个任务失败")
        return SolveCode.ERROR
    return SolveCode.SUCCESS
