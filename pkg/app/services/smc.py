"""
(SMC) 问题: min_{x ∈ X} h̄(x) + (1/N) Σ_s min_l h_l⁽ˢ⁾(x)

目标求值、ρ-active 集合、退化集合, 以及逐个 selection 枚举的全局求解。
"""
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

import numpy as np

from app.core import settings
from app.handler.exception_handlers import CapExceededException
from app.model.dto.solver import SolverConfig
from app.model.entity.problem import SmcProblem
from app.model.entity.weights import Weights
from app.model.vo.verdict import EnumerationResult
from app.services.base import BaseService
from app.services.funcs import evaluate

# ρ-active 判定的绝对松弛
ACTIVE_SLACK = 1e-12
# 多个最优 selection 的判定容差
OPTIMAL_TIE_TOL = 1e-9


def component_values(p: SmcProblem, x: np.ndarray, s: int) -> np.ndarray:
    """𝐡⁽ˢ⁾(x) = (h_1⁽ˢ⁾(x), …, h_{n_s}⁽ˢ⁾(x))"""
    return np.array([evaluate(atom, x) for atom in p.terms[s]])


def all_component_values(p: SmcProblem, x: np.ndarray) -> list[np.ndarray]:
    return [component_values(p, x, s) for s in range(p.N)]


def objective(p: SmcProblem, x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    return evaluate(p.hbar, x) + sum(float(h.min()) for h in all_component_values(p, x)) / p.N


def fbar(p: SmcProblem, x: np.ndarray, weights: Weights) -> float:
    """双凸替代函数 F̄(x, Q) = h̄(x) + (1/N) Σ_s ⟨q⁽ˢ⁾, 𝐡⁽ˢ⁾(x)⟩"""
    x = np.asarray(x, dtype=float)
    return evaluate(p.hbar, x) + sum(float(q @ h) for q, h in zip(weights.q, all_component_values(p, x))) / p.N


def sum_of_maxima(p: SmcProblem, x: np.ndarray) -> float:
    """h̄(x) + (1/N) Σ_s max_l h_l⁽ˢ⁾(x), 即 C = 0 时的值函数"""
    x = np.asarray(x, dtype=float)
    return evaluate(p.hbar, x) + sum(float(h.max()) for h in all_component_values(p, x)) / p.N


def active_indices(h: np.ndarray, rho: float) -> list[int]:
    lo, hi = float(h.min()), float(h.max())
    threshold = lo + rho * (hi - lo) + ACTIVE_SLACK
    return [l for l in range(h.shape[0]) if h[l] <= threshold]


def active_set(p: SmcProblem, x: np.ndarray, s: int, rho: float = 0.0) -> list[int]:
    """A_ρ⁽ˢ⁾(x) = {l : h_l(x) ≤ h(x) + ρ·(max_l' h_l'(x) - h(x))}, 0 ≤ ρ ≤ 1"""
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"ρ 必须位于 [0, 1], 实际为 {rho}")
    return active_indices(component_values(p, x, s), rho)


def degeneracy(p: SmcProblem, x: np.ndarray, rho: float = 0.0) -> tuple[list[int], int]:
    """
    Returns:
        (退化集合 I = {s : |A_ρ⁽ˢ⁾| ≥ 2}, 退化因子 Π_s |A_ρ⁽ˢ⁾|)
    """
    sizes = [len(active_set(p, x, s, rho)) for s in range(p.N)]
    return [s for s, size in enumerate(sizes) if size >= 2], math.prod(sizes)


class SmcService(BaseService):

    def piece_value(self, p: SmcProblem, sigma: Sequence[int]) -> tuple[float, np.ndarray]:
        """ν(σ) = min_{x ∈ X} F_σ(x)"""
        x, value = self.solver.solve_objective(p.piece_objective(sigma), p.X)
        return value, x

    def enumerate_global(self, p: SmcProblem, cap: int | None = None, workers: int = 1) -> EnumerationResult:
        """
        逐个求解全部 Π n_s 个凸片, 并列时取字典序最小的 σ

        Args:
            cap: selection 个数上限, 默认取 MICP_ENUMERATE_CAP
            workers: 线程数, 结果与并发度无关
        """
        cap = settings.micp.enumerate_cap if cap is None else cap
        if p.n_pieces > cap:
            raise CapExceededException(f"selection 个数 {p.n_pieces} 超过上限 {cap}")
        sigmas = [sigma for sigma in p.selections() if p.covers(sigma)]
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(lambda sigma: self.piece_value(p, sigma), sigmas))
        else:
            results = [self.piece_value(p, sigma) for sigma in sigmas]
        if not results:
            raise CapExceededException("没有满足 coverage 约束的 selection")

        best = min(value for value, _ in results)
        tie = OPTIMAL_TIE_TOL * max(1.0, abs(best))
        optimal = [sigma for sigma, (value, _) in zip(sigmas, results) if value <= best + tie]
        index = sigmas.index(optimal[0])
        value, x = results[index]
        self.logger.info(f"枚举完成: {p.name}, {len(sigmas)} 个凸片, F* = {value:.10g}, σ* = {optimal[0]}")
        return EnumerationResult(value=value, x=x, sigma=optimal[0], optimal_selections=optimal, pieces=len(sigmas))


def get_smc_service(cfg: SolverConfig | None = None) -> SmcService:
    return SmcService(cfg)
