"""
凸函数代数的求值、次梯度与结构判定
"""
import numpy as np

from app.handler.exception_handlers import DimensionMismatchException
from app.model.entity.atoms import Affine, Const, ConvexAtom, MaxAffine, NormAffine, Quadratic, Sum
from app.model.field_enum import NormKind
from app.utils.simplex import greedy_vertex, project_simplex, softmin

__all__ = [
    "evaluate", "subgradient", "gradient", "is_polyhedral", "is_smooth", "smoothness",
    "project_simplex", "softmin", "greedy_vertex", "ORDERS", "weighted_value", "quadratic_parts",
]

ORDERS = {NormKind.L1: 1, NormKind.L2: 2, NormKind.LINF: np.inf}

# MaxAffine 活跃行判定的相对容差
ACTIVE_ROW_TOL = 1e-12


def _check_dim(atom: ConvexAtom, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or (atom.dim is not None and x.shape[0] != atom.dim):
        raise DimensionMismatchException(f"x 的形状 {x.shape} 与原子维度 {atom.dim} 不匹配")
    return x


def _sign(y: np.ndarray) -> np.ndarray:
    # sign(0) = +1
    return np.where(y >= 0, 1.0, -1.0)


def evaluate(atom: ConvexAtom, x: np.ndarray) -> float:
    x = _check_dim(atom, x)
    match atom:
        case Affine():
            return float(atom.a @ x + atom.b)
        case Quadratic():
            return float(0.5 * x @ (atom.P @ x) + atom.a @ x + atom.b)
        case NormAffine():
            return float(atom.w * np.linalg.norm(atom.A @ x + atom.c, ord=ORDERS[atom.p]))
        case MaxAffine():
            return float(np.max(atom.A @ x + atom.b))
        case Const():
            return float(atom.value)
        case Sum():
            return float(sum(term.weight * evaluate(term.atom, x) for term in atom.terms))
    raise TypeError(f"未知的原子类型: {type(atom).__name__}")


def subgradient(atom: ConvexAtom, x: np.ndarray) -> np.ndarray:
    """
    确定性的次梯度: MaxAffine 取最小下标的活跃行, 范数的扭结处取 sign(0) = +1
    """
    x = _check_dim(atom, x)
    match atom:
        case Affine():
            return np.array(atom.a, dtype=float)
        case Quadratic():
            return atom.P @ x + atom.a
        case NormAffine():
            y = atom.A @ x + atom.c
            if atom.p == NormKind.L1:
                g = _sign(y)
            elif atom.p == NormKind.L2:
                norm = np.linalg.norm(y)
                g = y / norm if norm > 0 else np.zeros_like(y)
            else:
                magnitude = np.abs(y)
                i = int(np.argmax(magnitude >= magnitude.max() - ACTIVE_ROW_TOL * (1.0 + magnitude.max())))
                g = np.zeros_like(y)
                g[i] = 1.0 if y[i] >= 0 else -1.0
            return atom.w * (atom.A.T @ g)
        case MaxAffine():
            values = atom.A @ x + atom.b
            top = values.max()
            i = int(np.argmax(values >= top - ACTIVE_ROW_TOL * (1.0 + abs(top))))
            return np.array(atom.A[i], dtype=float)
        case Const():
            return np.zeros_like(x)
        case Sum():
            g = np.zeros_like(x)
            for term in atom.terms:
                g = g + term.weight * subgradient(term.atom, x)
            return g
    raise TypeError(f"未知的原子类型: {type(atom).__name__}")


def weighted_value(objective: list[tuple[float, ConvexAtom]], x: np.ndarray) -> float:
    return float(sum(w * evaluate(atom, x) for w, atom in objective))


def is_polyhedral(atom: ConvexAtom) -> bool:
    match atom:
        case Affine() | Const() | MaxAffine():
            return True
        case NormAffine():
            return atom.p != NormKind.L2
        case Sum():
            return all(is_polyhedral(term.atom) for term in atom.terms)
    return False


def is_smooth(atom: ConvexAtom) -> bool:
    match atom:
        case Affine() | Const() | Quadratic():
            return True
        case Sum():
            return all(is_smooth(term.atom) for term in atom.terms)
    return False


def gradient(atom: ConvexAtom, x: np.ndarray) -> np.ndarray:
    if not is_smooth(atom):
        raise ValueError(f"{atom.kind} 不是光滑原子")
    return subgradient(atom, x)


def smoothness(atom: ConvexAtom) -> float:
    """梯度的 Lipschitz 常数 (欧氏范数), 仅对光滑原子有定义"""
    match atom:
        case Affine() | Const():
            return 0.0
        case Quadratic():
            return float(np.linalg.eigvalsh(atom.P).max()) if atom.dim else 0.0
        case Sum() if is_smooth(atom):
            return float(sum(term.weight * smoothness(term.atom) for term in atom.terms))
    raise ValueError(f"{atom.kind} 不是光滑原子")


def quadratic_parts(atom: ConvexAtom, d: int) -> tuple[np.ndarray, np.ndarray, float] | None:
    """光滑原子展开为 (P, a, b), 其余返回 None"""
    match atom:
        case Affine():
            return np.zeros((d, d)), np.array(atom.a, dtype=float), atom.b
        case Const():
            return np.zeros((d, d)), np.zeros(d), atom.value
        case Quadratic():
            return np.array(atom.P, dtype=float), np.array(atom.a, dtype=float), atom.b
        case Sum():
            P, a, b = np.zeros((d, d)), np.zeros(d), 0.0
            for term in atom.terms:
                parts = quadratic_parts(term.atom, d)
                if parts is None:
                    return None
                P, a, b = P + term.weight * parts[0], a + term.weight * parts[1], b + term.weight * parts[2]
            return P, a, b
    return None
