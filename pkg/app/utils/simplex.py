"""
单纯形工具: 欧氏投影, softmin, 贪心顶点
"""
import numpy as np


def project_simplex(v: np.ndarray) -> np.ndarray:
    """
    欧氏投影到 Δ^n = {q ≥ 0, Σq = 1}, 排序法 O(n log n)

    Args:
        v: 任意实向量, 长度 ≥ 1

    Returns:
        唯一的投影点
    """
    v = np.asarray(v, dtype=float)
    n = v.shape[0]
    u = np.sort(v)[::-1]
    cssv = np.cumsum(u) - 1.0
    ind = np.arange(1, n + 1)
    cond = u - cssv / ind > 0
    rho = ind[cond][-1]
    theta = cssv[cond][-1] / float(rho)
    return np.maximum(v - theta, 0.0)


def softmin(u: np.ndarray) -> np.ndarray:
    """v_l = e^{-u_l} / Σ e^{-u_l'}, 先减去 min(u) 保证数值稳定"""
    u = np.asarray(u, dtype=float)
    e = np.exp(-(u - u.min()))
    return e / e.sum()


def greedy_vertex(h: np.ndarray) -> np.ndarray:
    """在 min(h) 的最小下标处取 1 的单纯形顶点"""
    h = np.asarray(h, dtype=float)
    q = np.zeros(h.shape[0])
    q[int(np.argmin(h))] = 1.0
    return q
