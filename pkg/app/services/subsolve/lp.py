"""
稠密修正单纯形法 (两阶段)

变量先按界变换为非负变量:
    lb 有限         z = lb + y          (ub 有限时追加 y + s = ub - lb)
    仅 ub 有限      z = ub - y
    自由变量        z = y⁺ - y⁻
然后给每个不等式行加松弛变量, 右端为负的行整体取反, 仅在没有可用松弛基的行上引入人工变量。
"""
from dataclasses import dataclass

import numpy as np

from app.handler.exception_handlers import InfeasibleException, IterationLimitException, UnboundedException
from app.model.dto.solver import SolverConfig
from app.services.subsolve.model import StandardModel
from app.utils.logger import get_logger

PIVOT_TOL = 1e-9


@dataclass
class ModelSolution:
    z: np.ndarray
    value: float
    iterations: int = 0


@dataclass
class _StandardForm:
    A: np.ndarray          # m × n_all, 列为 [y, 松弛, 人工]
    b: np.ndarray          # ≥ 0
    T: np.ndarray          # z = z0 + T y
    z0: np.ndarray
    n_y: int
    n_real: int            # y 与松弛的总数
    basis: list[int]       # 初始基
    twin: np.ndarray       # 自由变量拆分出的 y⁺ / y⁻ 互为对方, 其余为 -1


def _standard_form(model: StandardModel) -> _StandardForm:
    n = model.n
    columns: list[np.ndarray] = []
    z0 = np.zeros(n)
    ub_rows: list[tuple[int, float]] = []
    pairs: list[tuple[int, int]] = []
    for j in range(n):
        lb, ub = model.lb[j], model.ub[j]
        e = np.zeros(n)
        if np.isfinite(lb):
            z0[j] = lb
            e[j] = 1.0
            columns.append(e)
            if np.isfinite(ub):
                ub_rows.append((len(columns) - 1, ub - lb))
        elif np.isfinite(ub):
            z0[j] = ub
            e[j] = -1.0
            columns.append(e)
        else:
            e[j] = 1.0
            pairs.append((len(columns), len(columns) + 1))
            columns.append(e)
            columns.append(-e)
    T = np.array(columns).T if columns else np.zeros((n, 0))
    n_y = T.shape[1]

    G, h = model.G @ T, model.h - model.G @ z0
    A, b = model.A @ T, model.b - model.A @ z0
    U = np.zeros((len(ub_rows), n_y))
    u = np.zeros(len(ub_rows))
    for i, (k, width) in enumerate(ub_rows):
        U[i, k] = 1.0
        u[i] = width

    ineq = np.vstack([G, U]) if len(ub_rows) else G
    ineq_rhs = np.concatenate([h, u])
    m_ineq, m_eq = ineq.shape[0], A.shape[0]
    m = m_ineq + m_eq
    n_real = n_y + m_ineq

    rows = np.zeros((m, n_real))
    rows[:m_ineq, :n_y] = ineq
    rows[:m_ineq, n_y:] = np.eye(m_ineq)
    rows[m_ineq:, :n_y] = A
    rhs = np.concatenate([ineq_rhs, b])

    flip = rhs < 0
    rows[flip] *= -1.0
    rhs[flip] *= -1.0

    basis: list[int] = []
    artificial_rows: list[int] = []
    for i in range(m):
        if i < m_ineq and not flip[i]:
            basis.append(n_y + i)
        else:
            basis.append(-1)
            artificial_rows.append(i)
    art = np.zeros((m, len(artificial_rows)))
    for k, i in enumerate(artificial_rows):
        art[i, k] = 1.0
        basis[i] = n_real + k
    twin = np.full(n_real + len(artificial_rows), -1)
    for plus, minus in pairs:
        twin[plus], twin[minus] = minus, plus
    return _StandardForm(np.hstack([rows, art]), rhs, T, z0, n_y, n_real, basis, twin)


class LpSolver:
    def __init__(self, cfg: SolverConfig | None = None):
        self.cfg = cfg or SolverConfig()
        self.logger = get_logger(self.__class__.__name__)
        self.iterations = 0

    def _refactor(self, A: np.ndarray, b: np.ndarray, basis: list[int]) -> tuple[np.ndarray, np.ndarray]:
        Binv = np.linalg.inv(A[:, basis])
        x_B = Binv @ b
        x_B[(x_B < 0) & (x_B > -PIVOT_TOL)] = 0.0
        return Binv, x_B

    def _pivot(self, Binv: np.ndarray, x_B: np.ndarray, u: np.ndarray, r: int, theta: float):
        x_B -= theta * u
        x_B[r] = theta
        row = Binv[r] / u[r]
        Binv -= np.outer(u, row)
        Binv[r] = row

    def _simplex(self, A: np.ndarray, b: np.ndarray, cost: np.ndarray, basis: list[int],
                 allowed: np.ndarray, twin: np.ndarray) -> tuple[list[int], np.ndarray, np.ndarray]:
        """
        Dantzig 定价 (并列取最小下标), 连续 bland_after 次退化转轴后切换为 Bland 规则

        基中 y⁺ (或 y⁻) 的孪生列真实检验数恒为 0, 不参与进基;
        判定无界前先用新分解的 B⁻¹ 复核一次

        Returns:
            basis, x_B, B⁻¹
        """
        Binv, x_B = self._refactor(A, b, basis)
        degenerate = 0
        since_refactor = 0
        scale = max(1.0, float(np.abs(cost).max(initial=0.0)))
        while True:
            if self.iterations >= self.cfg.max_iters:
                raise IterationLimitException(f"单纯形法超过迭代上限 {self.cfg.max_iters}")
            j = self._entering(A, cost, basis, Binv, allowed, twin, scale, degenerate)
            if j is None:
                return basis, x_B, Binv
            u = Binv @ A[:, j]
            rows = np.flatnonzero(u > PIVOT_TOL * max(1.0, float(np.abs(u).max())))
            if rows.size == 0 and since_refactor > 0:
                Binv, x_B = self._refactor(A, b, basis)
                since_refactor = 0
                continue
            if rows.size == 0:
                raise UnboundedException("LP 目标在可行域上无下界")
            ratios = np.maximum(x_B[rows], 0.0) / u[rows]
            theta = float(ratios.min())
            ties = rows[ratios <= theta + PIVOT_TOL * max(1.0, theta)]
            if degenerate >= self.cfg.bland_after:
                r = int(min(ties, key=lambda i: basis[i]))
            else:
                r = int(ties[np.argmax(u[ties])])
            theta = max(float(x_B[r] / u[r]), 0.0)
            degenerate = degenerate + 1 if theta <= PIVOT_TOL else 0
            self._pivot(Binv, x_B, u, r, theta)
            basis[r] = j
            self.iterations += 1
            since_refactor += 1
            if since_refactor >= self.cfg.refactor_every:
                Binv, x_B = self._refactor(A, b, basis)
                since_refactor = 0

    def _entering(self, A: np.ndarray, cost: np.ndarray, basis: list[int], Binv: np.ndarray,
                  allowed: np.ndarray, twin: np.ndarray, scale: float, degenerate: int) -> int | None:
        reduced = cost - (cost[basis] @ Binv) @ A
        reduced[~allowed] = np.inf
        reduced[basis] = np.inf
        paired = twin[basis]
        reduced[paired[paired >= 0]] = np.inf
        candidates = np.flatnonzero(reduced < -self.cfg.tol_abs * scale)
        if candidates.size == 0:
            return None
        if degenerate >= self.cfg.bland_after:
            return int(candidates[0])
        return int(candidates[np.argmin(reduced[candidates])])

    def _phase_one(self, model: StandardModel) -> tuple[_StandardForm, list[int], np.ndarray, np.ndarray]:
        form = _standard_form(model)
        n_all = form.A.shape[1]
        basis = list(form.basis)
        if n_all == form.n_real:
            Binv, x_B = self._refactor(form.A, form.b, basis)
            return form, basis, x_B, Binv
        cost = np.zeros(n_all)
        cost[form.n_real:] = 1.0
        basis, x_B, Binv = self._simplex(form.A, form.b, cost, basis, np.ones(n_all, dtype=bool), form.twin)
        Binv, x_B = self._refactor(form.A, form.b, basis)
        infeasibility = float(cost[basis] @ x_B)
        if infeasibility > self.cfg.phase1_tol * max(1.0, float(np.abs(form.b).max(initial=0.0))):
            raise InfeasibleException(f"phase-1 目标值 {infeasibility:.3e} > 0, 可行域为空")

        # 把留在基中的人工变量换出, 主元取该行绝对值最大的非人工列; 换不出的行是冗余行, 人工变量保持为 0
        for r in range(len(basis)):
            if basis[r] < form.n_real:
                continue
            row = Binv[r] @ form.A[:, :form.n_real]
            row[[k for k in basis if k < form.n_real]] = 0.0
            biggest = float(np.abs(row).max(initial=0.0))
            if biggest <= PIVOT_TOL * max(1.0, float(np.abs(form.A).max(initial=0.0))):
                continue
            j = int(np.argmax(np.abs(row)))
            u = Binv @ form.A[:, j]
            self._pivot(Binv, x_B, u, r, 0.0)
            basis[r] = j
            Binv, x_B = self._refactor(form.A, form.b, basis)
        return form, basis, x_B, Binv

    @staticmethod
    def _recover(form: _StandardForm, basis: list[int], x_B: np.ndarray) -> np.ndarray:
        y_all = np.zeros(form.A.shape[1])
        y_all[basis] = np.maximum(x_B, 0.0)
        return form.z0 + form.T @ y_all[:form.n_y]

    def feasible_point(self, model: StandardModel) -> np.ndarray:
        """phase-1 得到的基可行解 (顶点)"""
        self.iterations = 0
        form, basis, x_B, _ = self._phase_one(model)
        return self._recover(form, basis, x_B)

    def solve(self, model: StandardModel) -> ModelSolution:
        if not model.is_linear:
            raise ValueError("LpSolver 只接受线性目标与线性约束")
        self.iterations = 0
        form, basis, x_B, _ = self._phase_one(model)
        n_all = form.A.shape[1]
        cost = np.zeros(n_all)
        cost[:form.n_y] = form.T.T @ model.c
        allowed = np.zeros(n_all, dtype=bool)
        allowed[:form.n_real] = True
        basis, x_B, _ = self._simplex(form.A, form.b, cost, basis, allowed, form.twin)
        z = self._recover(form, basis, x_B)
        self.logger.debug(f"LP 求解完成: n={model.n}, 迭代 {self.iterations} 次")
        return ModelSolution(z, model.objective(z), self.iterations)
