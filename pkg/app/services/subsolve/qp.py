"""
原始 active-set 法求解凸 QP: min ½z'Pz + c'z  s.t. Gz ≤ h, Az = b, lb ≤ z ≤ ub

起点为 phase-1 得到的顶点。每步在当前工作集的零空间内取牛顿步;
约化 Hessian 奇异且梯度在零曲率方向上有分量时沿该方向下降 (步长只受约束限制)。
"""
import numpy as np

from app.handler.exception_handlers import IterationLimitException, UnboundedException
from app.model.dto.solver import SolverConfig
from app.services.subsolve.lp import LpSolver, ModelSolution
from app.services.subsolve.model import StandardModel
from app.utils.logger import get_logger

ACTIVE_TOL = 1e-9
RANK_TOL = 1e-10


def _inequalities(model: StandardModel) -> tuple[np.ndarray, np.ndarray]:
    rows, rhs = [model.G], [model.h]
    n = model.n
    for j in range(n):
        if np.isfinite(model.ub[j]):
            e = np.zeros((1, n))
            e[0, j] = 1.0
            rows.append(e)
            rhs.append(np.array([model.ub[j]]))
        if np.isfinite(model.lb[j]):
            e = np.zeros((1, n))
            e[0, j] = -1.0
            rows.append(e)
            rhs.append(np.array([-model.lb[j]]))
    return np.vstack(rows), np.concatenate(rhs)


def _null_space(M: np.ndarray, n: int) -> np.ndarray:
    if M.shape[0] == 0:
        return np.eye(n)
    _, s, Vt = np.linalg.svd(M)
    rank = int(np.sum(s > RANK_TOL * max(1.0, s[0] if s.size else 0.0)))
    return Vt[rank:].T


def _independent(basis: list[np.ndarray], row: np.ndarray) -> np.ndarray | None:
    """Gram-Schmidt, row 与已有行线性无关时返回正交化后的单位向量"""
    residual = row.astype(float).copy()
    for q in basis:
        residual -= (q @ residual) * q
    norm = np.linalg.norm(residual)
    if norm <= RANK_TOL * max(1.0, np.linalg.norm(row)):
        return None
    return residual / norm


class ActiveSetQpSolver:
    def __init__(self, cfg: SolverConfig | None = None):
        self.cfg = cfg or SolverConfig()
        self.logger = get_logger(self.__class__.__name__)

    def solve(self, model: StandardModel) -> ModelSolution:
        if not model.is_qp:
            raise ValueError("ActiveSetQpSolver 不接受二次约束或二阶锥约束")
        z = LpSolver(self.cfg).feasible_point(model)
        n = model.n
        P, c = model.P, model.c
        G, h = _inequalities(model)

        ortho: list[np.ndarray] = []
        eq_rows: list[np.ndarray] = []
        for row in model.A:
            q = _independent(ortho, row)
            if q is not None:
                ortho.append(q)
                eq_rows.append(row)
        working: list[int] = []
        scale = 1.0 + np.abs(h)
        for i in np.flatnonzero(np.abs(G @ z - h) <= ACTIVE_TOL * scale):
            q = _independent(ortho, G[i])
            if q is not None:
                ortho.append(q)
                working.append(int(i))

        for iteration in range(1, self.cfg.max_iters + 1):
            g = P @ z + c
            Aw = np.vstack([*eq_rows, *(G[i] for i in working)]) if (eq_rows or working) else np.zeros((0, n))
            Z = _null_space(Aw, n)
            p = np.zeros(n)
            unbounded_step = False
            if Z.shape[1] > 0:
                gz = Z.T @ g
                lam, V = np.linalg.eigh(Z.T @ P @ Z)
                curvature_floor = RANK_TOL * max(1.0, float(np.abs(lam).max(initial=0.0)))
                positive = lam > curvature_floor
                flat = V[:, ~positive].T @ gz
                if np.linalg.norm(flat) > RANK_TOL * max(1.0, np.linalg.norm(g)):
                    p = -Z @ (V[:, ~positive] @ flat)
                    unbounded_step = True
                else:
                    p = -Z @ (V[:, positive] @ ((V[:, positive].T @ gz) / lam[positive]))

            if np.linalg.norm(p) <= 1e-12 * (1.0 + np.linalg.norm(z)):
                # 工作集上的驻点: 检查不等式乘子
                if not working:
                    return self._done(model, z, iteration)
                lam_all, *_ = np.linalg.lstsq(Aw.T, -g, rcond=None)
                lam_ineq = lam_all[len(eq_rows):]
                tol = self.cfg.tol_abs * max(1.0, np.linalg.norm(g))
                k = int(np.argmin(lam_ineq))
                if lam_ineq[k] >= -tol:
                    return self._done(model, z, iteration)
                working.pop(k)
                continue

            alpha = np.inf if unbounded_step else 1.0
            blocking = -1
            inactive = np.setdiff1d(np.arange(G.shape[0]), working)
            if inactive.size:
                slope = G[inactive] @ p
                moving = slope > 1e-12 * np.linalg.norm(G[inactive], axis=1) * np.linalg.norm(p)
                if np.any(moving):
                    idx = inactive[moving]
                    steps = np.maximum((h[idx] - G[idx] @ z) / slope[moving], 0.0)
                    k = int(np.argmin(steps))
                    if steps[k] < alpha:
                        alpha, blocking = float(steps[k]), int(idx[k])
            if not np.isfinite(alpha):
                raise UnboundedException("QP 目标沿零曲率方向无下界")
            z = z + alpha * p
            if blocking >= 0:
                working.append(blocking)
        raise IterationLimitException(f"active-set 超过迭代上限 {self.cfg.max_iters}", x=z[:model.n_x],
                                      value=model.objective(z))

    def _done(self, model: StandardModel, z: np.ndarray, iterations: int) -> ModelSolution:
        self.logger.debug(f"QP 求解完成: n={model.n}, 迭代 {iterations} 次")
        return ModelSolution(z, model.objective(z), iterations)
