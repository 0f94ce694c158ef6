"""
凸子问题求解入口

AUTO 分派: 线性 → 单纯形; 二次目标 + 线性约束 → active-set;
含 ‖·‖₂ / 二次约束 → 内点法; 以上都失败时退回投影次梯度法。
返回的目标值总是在 x 处对原子函数重新求值, 与辅助变量无关。
"""
from typing import Protocol

import numpy as np

from app.handler.exception_handlers import IterationLimitException, UnsupportedAtomException
from app.model.dto.solver import SolverConfig
from app.model.entity.atoms import ConvexAtom
from app.model.entity.feasible import FeasibleSet
from app.model.entity.problem import WeightedSubproblem
from app.model.field_enum import SolveMethod
from app.services.funcs import weighted_value
from app.services.subsolve.barrier import BarrierSolver
from app.services.subsolve.fallback import SubgradientSolver
from app.services.subsolve.lp import LpSolver, ModelSolution
from app.services.subsolve.model import ModelBuilder, StandardModel, lower
from app.services.subsolve.qp import ActiveSetQpSolver
from app.utils.logger import get_logger

VIOLATION_TOL = 1e-6


class SolverBackend(Protocol):
    """可替换的标准形模型求解后端"""

    def solve(self, model: StandardModel, cfg: SolverConfig) -> ModelSolution: ...


class ReferenceBackend:
    """内置的稠密实现"""

    def solve(self, model: StandardModel, cfg: SolverConfig) -> ModelSolution:
        if model.is_linear:
            return LpSolver(cfg).solve(model)
        if model.is_qp:
            return ActiveSetQpSolver(cfg).solve(model)
        return BarrierSolver(cfg).solve(model)


class ConvexSolver:
    def __init__(self, cfg: SolverConfig | None = None, backend: SolverBackend | None = None):
        self.cfg = cfg or SolverConfig()
        self.backend = backend or ReferenceBackend()
        self.logger = get_logger(self.__class__.__name__)

    def lower(self, objective: list[tuple[float, ConvexAtom]], X: FeasibleSet) -> StandardModel:
        """按配置的方法降阶; AUTO 下先尝试 LP/QP 形式, 失败再允许锥约束"""
        method = self.cfg.method
        if method == SolveMethod.BARRIER:
            return lower(objective, X, allow_conic=True)
        try:
            model = lower(objective, X)
        except UnsupportedAtomException:
            if method in (SolveMethod.LP, SolveMethod.QP):
                raise
            return lower(objective, X, allow_conic=True)
        if method == SolveMethod.LP and not model.is_linear:
            raise UnsupportedAtomException("目标含二次项, 不能用 LP 求解")
        return model

    def solve_model(self, model: StandardModel) -> ModelSolution:
        if self.cfg.method == SolveMethod.BARRIER:
            return BarrierSolver(self.cfg).solve(model)
        if self.cfg.method == SolveMethod.QP and model.is_qp:
            return ActiveSetQpSolver(self.cfg).solve(model)
        return self.backend.solve(model, self.cfg)

    def solve_objective(self, objective: list[tuple[float, ConvexAtom]],
                        X: FeasibleSet) -> tuple[np.ndarray, float]:
        """
        min_{x ∈ X} Σ w·atom(x)

        Returns:
            (x*, 目标值)
        """
        if self.cfg.method == SolveMethod.SUBGRADIENT:
            return SubgradientSolver(self.cfg).solve(objective, X)
        model = self.lower(objective, X)
        try:
            solution = self.solve_model(model)
            violation = model.max_violation(solution.z)
            if violation > VIOLATION_TOL * max(1.0, float(np.abs(solution.z).max(initial=0.0))):
                raise IterationLimitException(f"求解器返回的点违反约束 {violation:.3g}")
        except (IterationLimitException, np.linalg.LinAlgError) as exc:
            if self.cfg.method != SolveMethod.AUTO or model.is_qp or X.links:
                raise
            self.logger.warning(f"子问题求解失败 ({exc}), 退回次梯度法")
            return SubgradientSolver(self.cfg).solve(objective, X)
        x = solution.z[:X.dim]
        return x, weighted_value(objective, x)

    def solve_convex(self, subproblem: WeightedSubproblem) -> tuple[np.ndarray, float]:
        return self.solve_objective(subproblem.objective(), subproblem.problem.X)

    def find_feasible_point(self, X: FeasibleSet) -> np.ndarray:
        builder = ModelBuilder(X.dim, allow_conic=True)
        builder.add_feasible_set(X)
        model = builder.build()
        if model.is_linear:
            z = LpSolver(self.cfg).feasible_point(model)
        else:
            z = BarrierSolver(self.cfg).feasible_point(model)
        return z[:X.dim]


def solve_convex(subproblem: WeightedSubproblem, cfg: SolverConfig | None = None) -> tuple[np.ndarray, float]:
    return ConvexSolver(cfg).solve_convex(subproblem)


def find_feasible_point(X: FeasibleSet, cfg: SolverConfig | None = None) -> np.ndarray:
    """X 为空时抛出 InfeasibleException"""
    return ConvexSolver(cfg).find_feasible_point(X)


def minimize_quadratic_on_ball(P: np.ndarray, q: np.ndarray, radius: float) -> tuple[np.ndarray, float]:
    """
    min ½u'Pu + q'u  s.t. ‖u‖₂ ≤ radius, P 半正定

    Returns:
        (u*, 最优值)
    """
    P = 0.5 * (np.asarray(P, dtype=float) + np.asarray(P, dtype=float).T)
    q = np.asarray(q, dtype=float)
    lam, V = np.linalg.eigh(P)
    lam = np.maximum(lam, 0.0)
    qt = V.T @ q
    floor = 1e-12 * max(1.0, float(lam.max(initial=0.0)))
    positive = lam > floor
    # 内部解: q 落在 P 的值域内且 ‖P⁺q‖ ≤ R
    if np.linalg.norm(qt[~positive]) <= 1e-12 * max(1.0, np.linalg.norm(q)):
        ut = np.zeros_like(qt)
        ut[positive] = -qt[positive] / lam[positive]
        if np.linalg.norm(ut) <= radius:
            u = V @ ut
            return u, float(0.5 * u @ (P @ u) + q @ u)
    if radius == 0:
        return np.zeros_like(q), 0.0
    # 边界解: ‖(Λ + μ)⁻¹ q̃‖ = R, μ > 0
    lo, hi = 0.0, np.linalg.norm(q) / radius
    for _ in range(200):
        mu = 0.5 * (lo + hi)
        if np.linalg.norm(qt / (lam + mu)) > radius:
            lo = mu
        else:
            hi = mu
        if hi - lo <= 1e-15 * max(1.0, hi):
            break
    ut = -qt / (lam + hi)
    u = V @ ut
    return u, float(0.5 * u @ (P @ u) + q @ u)
