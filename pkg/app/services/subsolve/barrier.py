"""
对数障碍内点法, 处理二次约束与二阶锥约束

Phase I:  min s  s.t. f_i(z) ≤ s, s ≥ -1, Az = b, 得到 s < 0 即为严格可行点
Phase II: 中心路径 t·f0(z) + Σ φ_i(z), t 每轮乘以 MU, 直到 m/t < barrier_gap
二阶锥 ‖u‖ ≤ τ 的障碍函数为 -log(τ² - ‖u‖²), 度数记为 2
无界变量加上半径 CAP_FACTOR·(数据量级) 的盒约束, 否则 phase I 中 τ 可以无限增大
"""
from dataclasses import replace

import numpy as np

from app.handler.exception_handlers import InfeasibleException, IterationLimitException, UnboundedException
from app.model.dto.solver import SolverConfig
from app.services.subsolve.lp import ModelSolution
from app.services.subsolve.model import StandardModel
from app.utils.logger import get_logger

MU = 10.0
ARMIJO = 0.25
MAX_HALVINGS = 80
NEWTON_STEPS = 100
DECREMENT_TOL = 1e-10
STALL_TOL = 1e-6
CAP_FACTOR = 1e6


class _LinearTerm:
    def __init__(self, G: np.ndarray, h: np.ndarray):
        self.G, self.h = G, h
        self.degree = G.shape[0]

    def value(self, w):
        return self.G @ w - self.h

    def feasible(self, w) -> bool:
        return bool(np.all(self.h - self.G @ w > 0))

    def barrier(self, w):
        slack = self.h - self.G @ w
        inv = 1.0 / slack
        return -np.sum(np.log(slack)), self.G.T @ inv, (self.G.T * inv ** 2) @ self.G


class _QuadTerm:
    degree = 1

    def __init__(self, P: np.ndarray, q: np.ndarray, r: float):
        self.P, self.q, self.r = P, q, r

    def value(self, w):
        return 0.5 * w @ (self.P @ w) + self.q @ w + self.r

    def feasible(self, w) -> bool:
        return bool(self.value(w) < 0)

    def barrier(self, w):
        f = self.value(w)
        grad_f = self.P @ w + self.q
        return -np.log(-f), grad_f / -f, np.outer(grad_f, grad_f) / f ** 2 + self.P / -f


class _SocTerm:
    degree = 2

    def __init__(self, A: np.ndarray, c: np.ndarray, f: np.ndarray, g: float):
        self.A, self.c, self.f, self.g = A, c, f, g

    def value(self, w):
        return np.linalg.norm(self.A @ w + self.c) - (self.f @ w + self.g)

    def feasible(self, w) -> bool:
        u = self.A @ w + self.c
        tau = self.f @ w + self.g
        return bool(tau > 0 and tau ** 2 - u @ u > 0)

    def barrier(self, w):
        u = self.A @ w + self.c
        tau = self.f @ w + self.g
        D = tau ** 2 - u @ u
        grad_D = 2.0 * tau * self.f - 2.0 * self.A.T @ u
        hess_D = 2.0 * np.outer(self.f, self.f) - 2.0 * self.A.T @ self.A
        return -np.log(D), -grad_D / D, np.outer(grad_D, grad_D) / D ** 2 - hess_D / D


def _pin_fixed(model: StandardModel) -> StandardModel:
    """lb == ub 的变量改写为等式约束, 否则不存在严格内点"""
    fixed = np.flatnonzero(model.lb == model.ub)
    if fixed.size == 0:
        return model
    rows = np.zeros((fixed.size, model.n))
    rows[np.arange(fixed.size), fixed] = 1.0
    lb, ub = model.lb.copy(), model.ub.copy()
    values = lb[fixed].copy()
    lb[fixed], ub[fixed] = -np.inf, np.inf
    return replace(model, A=np.vstack([model.A, rows]), b=np.concatenate([model.b, values]), lb=lb, ub=ub)


class BarrierSolver:
    def __init__(self, cfg: SolverConfig | None = None):
        self.cfg = cfg or SolverConfig()
        self.logger = get_logger(self.__class__.__name__)
        self.iterations = 0

    def _radius(self, model: StandardModel) -> float:
        """无界变量的盒半径, 由起点与模型数据的量级决定"""
        data = [self._initial(model), model.lb, model.ub, model.h, model.b, model.G.ravel(), model.A.ravel()]
        data += [np.atleast_1d(soc.g) for soc in model.socs] + [soc.c for soc in model.socs]
        data += [np.atleast_1d(qc.r) for qc in model.quads]
        finite = [np.abs(v[np.isfinite(v)]).max(initial=0.0) for v in data if np.size(v)]
        return CAP_FACTOR * max([1.0, *finite])

    @staticmethod
    def _terms(model: StandardModel, phase_one: bool, radius: float) -> list:
        extra = 1 if phase_one else 0
        n = model.n + extra

        def pad(v: np.ndarray, s_coef: float = 0.0) -> np.ndarray:
            return np.concatenate([v, [s_coef]]) if phase_one else v

        rows, rhs = [row for row in model.G], list(model.h)
        for j in range(model.n):
            e = np.zeros(model.n)
            e[j] = 1.0
            rows.append(e)
            rhs.append(model.ub[j] if np.isfinite(model.ub[j]) else radius)
            rows.append(-e)
            rhs.append(-model.lb[j] if np.isfinite(model.lb[j]) else radius)
        G = np.array([pad(row, -1.0) for row in rows]).reshape(len(rows), n)
        h = np.array(rhs, dtype=float)
        if phase_one:
            # s ≥ -1
            cap = np.zeros((1, n))
            cap[0, -1] = -1.0
            G, h = np.vstack([G, cap]), np.concatenate([h, [1.0]])
        terms: list = [_LinearTerm(G, h)] if G.shape[0] else []
        for qc in model.quads:
            P = np.zeros((n, n))
            P[:model.n, :model.n] = qc.P
            terms.append(_QuadTerm(P, pad(qc.q, -1.0), qc.r))
        for soc in model.socs:
            A = np.hstack([soc.A, np.zeros((soc.A.shape[0], extra))])
            terms.append(_SocTerm(A, soc.c, pad(soc.f, 1.0), soc.g))
        return terms

    def _centre(self, z, t, f0, terms, A, early_stop=None) -> tuple[np.ndarray, bool]:
        """
        带等式约束的阻尼牛顿法, 最小化 t·f0 + Σφ

        Returns:
            (z, 是否收敛); 牛顿减量足够小或 early_stop 成立时视为收敛
        """

        def phi(w):
            if not all(term.feasible(w) for term in terms):
                return np.inf
            value, _, _ = f0(w)
            return t * value + sum(term.barrier(w)[0] for term in terms)

        n = z.shape[0]
        p = A.shape[0]
        for _ in range(NEWTON_STEPS):
            if self.iterations >= self.cfg.max_iters:
                raise IterationLimitException(f"内点法超过迭代上限 {self.cfg.max_iters}")
            self.iterations += 1
            _, g0, H0 = f0(z)
            grad, hess = t * g0, t * H0
            for term in terms:
                _, g_i, H_i = term.barrier(z)
                grad, hess = grad + g_i, hess + H_i
            kkt = np.zeros((n + p, n + p))
            kkt[:n, :n] = hess
            kkt[:n, n:] = A.T
            kkt[n:, :n] = A
            rhs = np.concatenate([-grad, np.zeros(p)])
            try:
                step = np.linalg.solve(kkt, rhs)[:n]
            except np.linalg.LinAlgError:
                step = np.linalg.lstsq(kkt, rhs, rcond=None)[0][:n]
            decrement = float(-grad @ step)
            if decrement / 2.0 <= DECREMENT_TOL:
                return z, True
            current = phi(z)
            alpha = 1.0
            for _ in range(MAX_HALVINGS):
                candidate = phi(z + alpha * step)
                if candidate <= current - ARMIJO * alpha * decrement:
                    break
                alpha *= 0.5
            else:
                # 线搜索失败: 减量已在舍入误差量级时接受当前点
                return z, decrement <= STALL_TOL
            z = z + alpha * step
            if early_stop is not None and early_stop(z):
                return z, True
        return z, False

    def _initial(self, model: StandardModel) -> np.ndarray:
        lo = np.where(np.isfinite(model.lb), model.lb, -np.inf)
        hi = np.where(np.isfinite(model.ub), model.ub, np.inf)
        z = np.zeros(model.n)
        both = np.isfinite(lo) & np.isfinite(hi)
        z[both] = 0.5 * (lo[both] + hi[both])
        z[np.isfinite(lo) & ~both] = lo[np.isfinite(lo) & ~both] + 1.0
        z[np.isfinite(hi) & ~both] = hi[np.isfinite(hi) & ~both] - 1.0
        if model.A.shape[0]:
            z = z - np.linalg.lstsq(model.A, model.A @ z - model.b, rcond=None)[0]
        return z

    def feasible_point(self, model: StandardModel, strict: bool = False) -> np.ndarray:
        """
        Phase I

        Args:
            strict: 为 True 时要求严格可行点 (内点法 phase II 的起点)
        """
        model = _pin_fixed(model)
        terms = self._terms(model, phase_one=True, radius=self._radius(model))
        z = self._initial(model)
        violation = max((float(np.max(np.atleast_1d(term.value(np.concatenate([z, [0.0]])))))
                         for term in terms), default=-1.0)
        w = np.concatenate([z, [max(violation, -0.5) + 1.0]])
        A = np.hstack([model.A, np.zeros((model.A.shape[0], 1))])
        n = w.shape[0]

        def f0(v):
            g = np.zeros(n)
            g[-1] = 1.0
            return v[-1], g, np.zeros((n, n))

        degree = sum(term.degree for term in terms)
        t = 1.0
        while True:
            w, converged = self._centre(w, t, f0, terms, A, early_stop=lambda v: v[-1] < -1e-6)
            if w[-1] < -1e-6:
                break
            if not converged:
                raise IterationLimitException(f"phase-1 中心化未收敛 (t = {t:.1e}, s = {w[-1]:.3e})")
            if degree / t < self.cfg.barrier_gap:
                break
            t *= MU
        s = float(w[-1])
        if model.A.shape[0] and np.abs(model.A @ w[:-1] - model.b).max() > self.cfg.phase1_tol * max(1.0, np.abs(model.b).max()):
            raise InfeasibleException("等式约束不相容")
        if s < 0 or (not strict and s <= self.cfg.phase1_tol):
            return w[:-1]
        raise InfeasibleException(f"phase-1 最优值 s* = {s:.3e}, 可行域为空或没有内点")

    def solve(self, model: StandardModel) -> ModelSolution:
        self.iterations = 0
        model = _pin_fixed(model)
        z = self.feasible_point(model, strict=True)
        radius = self._radius(model)
        terms = self._terms(model, phase_one=False, radius=radius)
        degree = sum(term.degree for term in terms)

        def f0(v):
            return model.objective(v), model.P @ v + model.c, model.P

        t = 1.0
        while True:
            z, converged = self._centre(z, t, f0, terms, model.A)
            if not converged:
                raise IterationLimitException(f"内点法中心化未收敛 (t = {t:.1e})")
            if degree == 0 or degree / t < self.cfg.barrier_gap:
                break
            t *= MU
        free = ~(np.isfinite(model.lb) & np.isfinite(model.ub))
        if np.any(np.abs(z[free]) > 0.5 * radius):
            raise UnboundedException(f"内点法迭代点到达盒半径 {radius:.1e}, 目标在可行域上无下界")
        self.logger.debug(f"内点法求解完成: n={model.n}, 牛顿步 {self.iterations} 次")
        return ModelSolution(z, model.objective(z), self.iterations)
