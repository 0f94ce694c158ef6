"""
投影次梯度法, 仅在其它方法都不可用时使用

步长: 已知下界 f_low 时取 Polyak 步长 (f - f_low)/‖g‖²,
否则以 f_best - γ_k 为目标值, γ_k = γ₀/√k。
投影: 各个分量集合的投影用 Dykstra 交替投影组合。
"""
import numpy as np

from app.handler.exception_handlers import IterationLimitException, UnsupportedAtomException
from app.model.dto.solver import SolverConfig
from app.model.entity.atoms import ConvexAtom
from app.model.entity.feasible import FeasibleSet
from app.model.field_enum import NormKind
from app.services.funcs import subgradient, weighted_value
from app.utils.logger import get_logger
from app.utils.simplex import project_simplex

DYKSTRA_ITERS = 500
STALL_WINDOW = 2000


def _project_l1_ball(y: np.ndarray, radius: float) -> np.ndarray:
    if np.abs(y).sum() <= radius:
        return y
    if radius == 0:
        return np.zeros_like(y)
    return np.sign(y) * radius * project_simplex(np.abs(y) / radius)


def _projectors(X: FeasibleSet) -> list:
    if X.links:
        raise UnsupportedAtomException("次梯度法不支持 EpigraphLink 约束")
    projectors = []
    if X.box is not None:
        lo, hi = X.box.lo, X.box.hi
        projectors.append(lambda y: np.clip(y, lo, hi))
    for ball in X.balls:
        coords, center, radius, p = ball.coords(X.dim), ball.center, ball.radius, ball.p

        def project_ball(y, coords=coords, center=center, radius=radius, p=p):
            out = y.copy()
            diff = y[coords] - center
            if p == NormKind.LINF:
                diff = np.clip(diff, -radius, radius)
            elif p == NormKind.L2:
                norm = np.linalg.norm(diff)
                if norm > radius:
                    diff = diff * (radius / norm)
            else:
                diff = _project_l1_ball(diff, radius)
            out[coords] = center + diff
            return out

        projectors.append(project_ball)
    for hs in X.halfspaces:
        for a, b in zip(hs.G, hs.g):
            norm2 = float(a @ a)
            if norm2 == 0:
                continue
            projectors.append(lambda y, a=a, b=b, norm2=norm2: y - max(0.0, a @ y - b) / norm2 * a)
    for hp in X.hyperplanes:
        pinv = np.linalg.pinv(hp.E)
        projectors.append(lambda y, E=hp.E, e=hp.e, pinv=pinv: y - pinv @ (E @ y - e))
    return projectors


def project(X: FeasibleSet, y: np.ndarray) -> np.ndarray:
    """欧氏投影到 X (Dykstra)"""
    projectors = _projectors(X)
    if not projectors:
        return y.copy()
    if len(projectors) == 1:
        return projectors[0](y)
    x = y.copy()
    corrections = [np.zeros_like(y) for _ in projectors]
    for _ in range(DYKSTRA_ITERS):
        previous = x
        for k, proj in enumerate(projectors):
            shifted = x + corrections[k]
            x_next = proj(shifted)
            corrections[k] = shifted - x_next
            x = x_next
        if np.linalg.norm(x - previous) <= 1e-13 * (1.0 + np.linalg.norm(x)):
            break
    return x


class SubgradientSolver:
    def __init__(self, cfg: SolverConfig | None = None):
        self.cfg = cfg or SolverConfig()
        self.logger = get_logger(self.__class__.__name__)

    def solve(self, objective: list[tuple[float, ConvexAtom]], X: FeasibleSet,
              x0: np.ndarray | None = None) -> tuple[np.ndarray, float]:
        if x0 is None:
            lo, hi = X.bounding_box()
            x0 = np.where(np.isfinite(lo) & np.isfinite(hi), 0.5 * (lo + hi), np.clip(0.0, lo, hi))
        x = project(X, np.asarray(x0, dtype=float))
        f_low = self.cfg.lower_bound
        best_x, best = x, weighted_value(objective, x)
        gamma0 = max(1e-2, 1e-3 * abs(best))
        last_improvement = 0
        for k in range(1, self.cfg.subgradient_max_iters + 1):
            f = weighted_value(objective, x)
            if f < best - self.cfg.tol_abs:
                last_improvement = k
            if f < best:
                best_x, best = x, f
            if f_low is not None and best - f_low <= self.cfg.tol_abs * max(1.0, abs(f_low)):
                return best_x, best
            g = sum(w * subgradient(atom, x) for w, atom in objective)
            g_norm2 = float(g @ g)
            if g_norm2 == 0:
                return x, f
            if f_low is None and k - last_improvement > STALL_WINDOW:
                self.logger.debug(f"次梯度法停滞, 迭代 {k} 次, f_best = {best:.6g}")
                return best_x, best
            target = f_low if f_low is not None else best - gamma0 / np.sqrt(k)
            step = (f - target) / g_norm2
            x = project(X, x - step * g)
        raise IterationLimitException(f"次梯度法超过迭代上限 {self.cfg.subgradient_max_iters}",
                                      x=best_x, value=best)
