"""
实例库: 最坏情况生成器、toy 实例、PLR / RFL 构造器与闭式局部 S-bounds、聚类的有效约束
"""
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import pandas as pd

from app.handler.exception_handlers import BadDimsException, ConfigException, ShapeMismatchException
from app.model.dto.bench import InstanceSpec
from app.model.dto.problem_spec import PlrSpec, RflSpec
from app.model.entity.atoms import Affine, Const, ConvexAtom, MaxAffine, NormAffine, Quadratic, SumTerm, Sum
from app.model.entity.bounds import SBounds
from app.model.entity.feasible import Box, EpigraphLink, FeasibleSet, Halfspaces, Hyperplanes, NormBall
from app.model.entity.problem import SmcProblem
from app.model.field_enum import ClusterConstraint, InstanceSource, NormKind
from app.utils.logger import get_logger

logger = get_logger(__name__)

# 闭式 R > 0 放宽为 R ≥ R_FLOOR
R_FLOOR = 1e-9

DUAL_NORM = {NormKind.L1: np.inf, NormKind.L2: 2, NormKind.LINF: 1}


def _sign(u: np.ndarray) -> np.ndarray:
    return np.where(u >= 0, 1.0, -1.0)


# ==================== 最坏情况与 toy 实例 ====================

def fully_active(N: int, n: Sequence[int], d: int, hbar: ConvexAtom | None = None,
                 box: Box | None = None) -> SmcProblem:
    """
    h_l⁽ˢ⁾(x) = l·x_s + l(l-1)/2 (l 从 1 开始), 每个 σ 都在某个开区域上唯一活跃

    Args:
        box: 默认取 [-max n, 1]^d
    """
    if N < 1 or len(n) != N or d < N or any(size < 1 for size in n):
        raise BadDimsException(f"fully_active 需要 d ≥ N ≥ 1 且 len(n) = N, 实际 N={N}, n={list(n)}, d={d}")
    terms = []
    for s, size in enumerate(n):
        components = []
        for l in range(1, size + 1):
            a = np.zeros(d)
            a[s] = float(l)
            components.append(Affine(a=a, b=l * (l - 1) / 2.0))
        terms.append(components)
    box = box or Box.uniform(d, -float(max(n)), 1.0)
    return SmcProblem(name=f"fully_active_{N}", hbar=hbar or Const(value=0.0), terms=terms,
                      X=FeasibleSet(dim=d, box=box), metadata={"kind": "fully_active", "n": list(n)})


def _scalar_quadratic(p: float, a: float, b: float) -> Quadratic:
    return Quadratic(P=[[p]], a=[a], b=b)


def kink_instance() -> SmcProblem:
    """|x| + min{x - 1/8, x², 2x - 1/16} on [-2, 2], F* = -33/16"""
    return SmcProblem(
        name="kink",
        hbar=NormAffine(p=NormKind.L1, A=[[1.0]], c=[0.0]),
        terms=[[Affine(a=[1.0], b=-1 / 8), _scalar_quadratic(2.0, 0.0, 0.0), Affine(a=[2.0], b=-1 / 16)]],
        X=FeasibleSet.from_box([-2.0], [2.0]),
    )


def two_clip_instance() -> SmcProblem:
    """-1/4 + ½(min{(x-1)², ½} + min{x², ½}) on [-1, 2], F(0) = F(½) = F(1) = 0"""
    return SmcProblem(
        name="two_clip",
        hbar=Const(value=-0.25),
        terms=[
            [_scalar_quadratic(2.0, -2.0, 1.0), Const(value=0.5)],
            [_scalar_quadratic(2.0, 0.0, 0.0), Const(value=0.5)],
        ],
        X=FeasibleSet.from_box([-1.0], [2.0]),
    )


def saddle_instance() -> SmcProblem:
    """
    min{(x₁-3)² + ⅓(x₂+3)², (x₁+3)² + x₂²/6, 15} + min{(x₂ - 2x₁ + 1)², |x₁+2|}
    两个 term 都乘 N = 2, 全局最优 (-5/2, 0), F* = 3/4
    """
    v = np.array([-2.0, 1.0])
    return SmcProblem(
        name="saddle",
        terms=[
            [Quadratic(P=np.diag([4.0, 4 / 3]), a=[-12.0, 4.0], b=24.0),
             Quadratic(P=np.diag([4.0, 2 / 3]), a=[12.0, 0.0], b=18.0),
             Const(value=30.0)],
            [Quadratic(P=4.0 * np.outer(v, v), a=4.0 * v, b=2.0),
             NormAffine(p=NormKind.L1, A=[[1.0, 0.0]], c=[2.0], w=2.0)],
        ],
        X=FeasibleSet.from_box([-10.0, -10.0], [10.0, 10.0]),
    )


def valley_instance() -> SmcProblem:
    """一维两 term 的山谷实例, 全局最优 x* = -2, F* = -3"""
    return SmcProblem(
        name="valley",
        terms=[
            [_scalar_quadratic(2.0, -3.0, -2.0), _scalar_quadratic(2.0, 0.0, 2.0),
             _scalar_quadratic(2.0, 1.0, -2.0), _scalar_quadratic(2.0, 4.0, 2.0)],
            [_scalar_quadratic(1.0, 2.0, -2.0), _scalar_quadratic(2.0, 4.0, 2.0),
             _scalar_quadratic(2.0, 0.0, -1.0)],
        ],
        X=FeasibleSet.from_box([-5.0], [5.0]),
    )


TOY_BUILDERS = {
    "kink": kink_instance,
    "two_clip": two_clip_instance,
    "saddle": saddle_instance,
    "valley": valley_instance,
}


def toy_library() -> dict[str, SmcProblem]:
    return {name: builder() for name, builder in TOY_BUILDERS.items()}


# ==================== 分段线性回归 ====================

def plr_feature_expand(raw: np.ndarray) -> np.ndarray:
    """β̃ → (β̃, β̃₁·β̃_{1:}, β̃₂·β̃_{2:}, …), p = p̃(3 + p̃)/2; 二维输入按行展开"""
    raw = np.asarray(raw, dtype=float)
    if raw.ndim == 2:
        return np.vstack([plr_feature_expand(row) for row in raw]) if raw.shape[0] else raw
    tails = [raw[i] * raw[i:] for i in range(raw.shape[0])]
    return np.concatenate([raw, *tails])


def _plr_block(spec: PlrSpec, part: int, e: int) -> slice:
    """x⁽¹⁾_e 或 x⁽²⁾_e 在决策向量中的位置"""
    start = (e if part == 1 else spec.B1 + e) * spec.p
    return slice(start, start + spec.p)


def _plr_rows(spec: PlrSpec, beta: np.ndarray, part: int) -> np.ndarray:
    """ℓ_part(β; x) 的 MaxAffine 行"""
    count = spec.B1 if part == 1 else spec.B2
    A = np.zeros((count, spec.d))
    for e in range(count):
        A[e, _plr_block(spec, part, e)] = beta
    return A


def plr_build(spec: PlrSpec) -> SmcProblem:
    """
    mean |γ - Δℓ(β; x)| 写成 h̄ + (1/N) Σ_s min_l h_l,
    h̄ = (1/N) Σ_s max{γ + ℓ₂, ℓ₁} + max{-γ + ℓ₁, ℓ₂},  h_l = -⟨β, x⁽¹⁾_{e₁(l)} + x⁽²⁾_{e₂(l)}⟩
    """
    hbar_terms, terms = [], []
    for gamma, beta in zip(spec.gamma, spec.beta):
        rows1, rows2 = _plr_rows(spec, beta, 1), _plr_rows(spec, beta, 2)
        plus = MaxAffine(A=np.vstack([rows2, rows1]),
                         b=np.concatenate([np.full(spec.B2, gamma), np.zeros(spec.B1)]))
        minus = MaxAffine(A=np.vstack([rows1, rows2]),
                          b=np.concatenate([np.full(spec.B1, -gamma), np.zeros(spec.B2)]))
        hbar_terms += [SumTerm(weight=1.0 / spec.N, atom=plus), SumTerm(weight=1.0 / spec.N, atom=minus)]
        components = []
        for l in range(spec.n_bar):
            a = np.zeros(spec.d)
            a[_plr_block(spec, 1, spec.e1(l))] -= beta
            a[_plr_block(spec, 2, spec.e2(l))] -= beta
            components.append(Affine(a=a, b=0.0))
        terms.append(components)
    return SmcProblem(
        name=f"plr_{spec.N}x{spec.p}_{spec.B1}x{spec.B2}",
        hbar=Sum(terms=hbar_terms),
        terms=terms,
        X=FeasibleSet(dim=spec.d, box=Box.uniform(spec.d, -spec.L, spec.L)),
        metadata={"kind": "plr", "B1": spec.B1, "B2": spec.B2, "p": spec.p},
    )


def plr_predict(spec: PlrSpec, x: np.ndarray, beta: np.ndarray | None = None) -> np.ndarray:
    """Δℓ(β; x) = max_e ⟨β, x⁽¹⁾_e⟩ - max_e ⟨β, x⁽²⁾_e⟩"""
    beta = spec.beta if beta is None else np.atleast_2d(beta)
    X1 = np.stack([x[_plr_block(spec, 1, e)] for e in range(spec.B1)])
    X2 = np.stack([x[_plr_block(spec, 2, e)] for e in range(spec.B2)])
    return (beta @ X1.T).max(axis=1) - (beta @ X2.T).max(axis=1)


def plr_loss(spec: PlrSpec, x: np.ndarray) -> float:
    """直接计算的平均 L1 损失"""
    return float(np.mean(np.abs(spec.gamma - plr_predict(spec, np.asarray(x, dtype=float)))))


def plr_local_sbounds(spec: PlrSpec, x_hat: np.ndarray, R: float,
                      dual_norms: Sequence[float] | None = None) -> SBounds:
    """
    𝒮 = ×_e B(x̂_e; R) 上的闭式 S-bounds:
    M_{l₊,l} = h_{l₊}(x̂) - h_l(x̂) + 2·(𝟙[e₁ 不同] + 𝟙[e₂ 不同])·R·‖β‖*

    Args:
        dual_norms: 每个样本 β 的对偶范数, 默认由 spec.norm 推出
    """
    if R <= 0:
        raise ValueError(f"R 必须为正, 实际为 {R}")
    x_hat = np.asarray(x_hat, dtype=float)
    if dual_norms is None:
        dual_norms = np.linalg.norm(spec.beta, ord=DUAL_NORM[spec.norm], axis=1)
    e1 = np.array([spec.e1(l) for l in range(spec.n_bar)])
    e2 = np.array([spec.e2(l) for l in range(spec.n_bar)])
    differs = (e1[:, None] != e1[None, :]).astype(float) + (e2[:, None] != e2[None, :]).astype(float)
    X1 = np.stack([x_hat[_plr_block(spec, 1, e)] for e in range(spec.B1)])
    X2 = np.stack([x_hat[_plr_block(spec, 2, e)] for e in range(spec.B2)])
    matrices = []
    for beta, dual in zip(spec.beta, dual_norms):
        h = -((X1 @ beta)[e1] + (X2 @ beta)[e2])
        M = h[:, None] - h[None, :] + 2.0 * differs * R * dual
        M = np.maximum(M, 0.0)
        np.fill_diagonal(M, 0.0)
        matrices.append(M)
    return SBounds(M=matrices)


def plr_neighbourhood(spec: PlrSpec, x_hat: np.ndarray, R: float) -> FeasibleSet:
    """每个子向量 x_e 一个半径 R 的 spec.norm 球"""
    x_hat = np.asarray(x_hat, dtype=float)
    balls = []
    for part, count in ((1, spec.B1), (2, spec.B2)):
        for e in range(count):
            block = _plr_block(spec, part, e)
            balls.append(NormBall(p=spec.norm, center=x_hat[block], radius=R,
                                  indices=list(range(block.start, block.stop))))
    return FeasibleSet(dim=spec.d, balls=balls)


def plr_synthetic(N: int, p: int, B1: int, B2: int, seed: int = 0, noise: float = 0.1,
                  L: float = 100.0, norm: NormKind = NormKind.L1) -> PlrSpec:
    """β ~ U[-1, 1]^p, γ = Δℓ(β; x_true) + 噪声"""
    rng = np.random.default_rng(seed)
    beta = rng.uniform(-1.0, 1.0, size=(N, p))
    shell = PlrSpec(gamma=np.zeros(N), beta=beta, B1=B1, B2=B2, L=L, norm=norm)
    x_true = rng.normal(size=shell.d)
    gamma = plr_predict(shell, x_true) + noise * rng.normal(size=N)
    return PlrSpec(gamma=gamma, beta=beta, B1=B1, B2=B2, L=L, norm=norm)


def plr_spec_from_frame(frame: pd.DataFrame, B1: int, B2: int, L: float = 100.0, expand: bool = True,
                        norm: NormKind = NormKind.L1) -> PlrSpec:
    """target 列为 γ, 其余数值列为原始特征"""
    if "target" not in frame.columns:
        raise ConfigException("PLR 数据集缺少 target 列")
    features = frame.drop(columns=["target"]).select_dtypes(include="number")
    if features.shape[1] == 0:
        raise ConfigException("PLR 数据集没有数值特征列")
    raw = features.to_numpy(dtype=float)
    beta = plr_feature_expand(raw) if expand else raw
    return PlrSpec(gamma=frame["target"].to_numpy(dtype=float), beta=beta, B1=B1, B2=B2, L=L, norm=norm)


# ==================== 受限选址 ====================

def _select(d: int, where: slice) -> np.ndarray:
    E = np.zeros((where.stop - where.start, d))
    E[:, where] = np.eye(where.stop - where.start)
    return E


def rfl_build(spec: RflSpec) -> SmcProblem:
    """
    Λ·max{R - R_ref, 0} + (1/N) Σ_s min_l (N·P_s/P̄)·‖β_s - x_l‖₁,
    X = {R ≥ 1e-9, ‖x₀ - x_l‖₁ ≤ R}
    """
    d = spec.d
    e_R = np.zeros(d)
    e_R[0] = spec.penalty
    if spec.penalty > 0:
        hbar = MaxAffine(A=np.vstack([e_R, np.zeros(d)]), b=[-spec.penalty * spec.R_ref, 0.0])
    else:
        hbar = Const(value=0.0)
    scale = spec.N / float(spec.population.sum())
    terms = [[NormAffine(p=NormKind.L1, A=-_select(d, spec.store_slice(l)), c=beta, w=scale * weight)
              for l in range(1, spec.B + 1)]
             for weight, beta in zip(spec.population, spec.beta)]
    lo = np.full(d, -np.inf)
    lo[0] = R_FLOOR
    hub = _select(d, spec.store_slice(0))
    links = [EpigraphLink(atom=NormAffine(p=NormKind.L1, A=hub - _select(d, spec.store_slice(l)), c=np.zeros(2)),
                          bound_index=0)
             for l in range(1, spec.B + 1)]
    return SmcProblem(
        name=f"rfl_{spec.N}x{spec.B}",
        hbar=hbar,
        terms=terms,
        X=FeasibleSet(dim=d, box=Box(lo=lo, hi=np.full(d, np.inf)), links=links),
        metadata={"kind": "rfl", "B": spec.B, "penalty": spec.penalty, "R_ref": spec.R_ref},
    )


def rfl_cost(spec: RflSpec, x: np.ndarray) -> float:
    """直接计算的 Λ·max{R - R_ref, 0} + Σ_s P_s min_l ‖β_s - x_l‖₁ / P̄"""
    x = np.asarray(x, dtype=float)
    stores = np.stack([x[spec.store_slice(l)] for l in range(1, spec.B + 1)])
    distance = np.abs(spec.beta[:, None, :] - stores[None, :, :]).sum(axis=2).min(axis=1)
    return float(spec.penalty * max(x[0] - spec.R_ref, 0.0)
                 + spec.population @ distance / spec.population.sum())


def rfl_local_sbounds(spec: RflSpec, x_hat: np.ndarray, R_inf: float) -> SBounds:
    """
    𝒮 = [R̂ - R∞, R̂ + R∞] × ×_l B_∞(x̂_l; R∞) 上的闭式 S-bounds:
    M_{l₊,l} = (N·P_s/P̄)·(‖u₊ + R∞·sign(u₊)‖₁ - ‖u - min(R∞, |u|)·sign(u)‖₁),  u = β_s - x̂_l
    """
    if R_inf <= 0:
        raise ValueError(f"R∞ 必须为正, 实际为 {R_inf}")
    x_hat = np.asarray(x_hat, dtype=float)
    stores = np.stack([x_hat[spec.store_slice(l)] for l in range(1, spec.B + 1)])
    scale = spec.N / float(spec.population.sum())
    matrices = []
    for weight, beta in zip(spec.population, spec.beta):
        u = beta[None, :] - stores
        far = np.abs(u + R_inf * _sign(u)).sum(axis=1)
        near = np.abs(u - np.minimum(R_inf, np.abs(u)) * _sign(u)).sum(axis=1)
        M = np.maximum(scale * weight * (far[:, None] - near[None, :]), 0.0)
        np.fill_diagonal(M, 0.0)
        matrices.append(M)
    return SBounds(M=matrices)


def rfl_neighbourhood(spec: RflSpec, x_hat: np.ndarray, R_inf: float) -> FeasibleSet:
    x_hat = np.asarray(x_hat, dtype=float)
    return FeasibleSet.from_box(x_hat - R_inf, x_hat + R_inf)


def rfl_synthetic(N: int, B: int, seed: int = 0, R_ref: float = 1.0, penalty: float = 0.0,
                  extent: float = 4.0) -> RflSpec:
    """城市坐标 ~ U[0, extent]², 人口 ~ U{1, …, 1000}"""
    rng = np.random.default_rng(seed)
    return RflSpec(population=rng.integers(1, 1001, size=N).astype(float),
                   beta=rng.uniform(0.0, extent, size=(N, 2)), B=B, R_ref=R_ref, penalty=penalty)


def rfl_spec_from_frame(frame: pd.DataFrame, B: int, R_ref: float = 1.0, penalty: float = 0.0) -> RflSpec:
    """lat / lng 直接作为平面坐标, 不做投影"""
    missing = {"lat", "lng", "population"} - set(frame.columns)
    if missing:
        raise ConfigException(f"RFL 数据集缺少列: {sorted(missing)}")
    return RflSpec(population=frame["population"].to_numpy(dtype=float),
                   beta=frame[["lat", "lng"]].to_numpy(dtype=float), B=B, R_ref=R_ref, penalty=penalty)


def box_neighbourhood(x_hat: np.ndarray, below: float, above: float) -> FeasibleSet:
    x_hat = np.asarray(x_hat, dtype=float)
    return FeasibleSet.from_box(x_hat - below, x_hat + above)


# ==================== 聚类的有效约束 / 对称破缺 ====================

def rfl_centroids(spec: RflSpec) -> list[slice]:
    return [spec.store_slice(l) for l in range(1, spec.B + 1)]


def clustering_constraints(p: SmcProblem, points: np.ndarray, centroids: Sequence[slice],
                           kind: ClusterConstraint, delta_bar: float = 0.0) -> SmcProblem:
    """
    Args:
        points: N×m 数据点, 每个质心 x_l 是 m 维子向量
        centroids: 质心在决策向量中的位置
        kind: hull 为 x_l ∈ conv{β_s} (追加 B·N 个凸组合系数);
              order 为 ⟨1, x_{l₁} - x_{l₂}⟩ ≥ δ̄ (l₁ < l₂);
              coverage 为每个分量至少被一个 term 选中
    """
    points = np.asarray(points, dtype=float)
    if any(c.stop - c.start != points.shape[1] for c in centroids):
        raise ShapeMismatchException("质心维度与数据点维度不一致")
    d = p.dim
    match kind:
        case ClusterConstraint.COVERAGE:
            if len(set(p.sizes)) != 1:
                raise ShapeMismatchException("coverage 约束要求所有 term 的分量个数相同")
            return SmcProblem(**{**dict(p), "coverage": True})
        case ClusterConstraint.ORDER:
            rows = []
            for i, first in enumerate(centroids):
                for second in centroids[i + 1:]:
                    row = np.zeros(d)
                    row[first] -= 1.0
                    row[second] += 1.0
                    rows.append(row)
            if not rows:
                return p
            X = p.X.intersect(FeasibleSet(dim=d, halfspaces=[Halfspaces(G=np.array(rows),
                                                                        g=np.full(len(rows), -delta_bar))]))
            return SmcProblem(**{**dict(p), "X": X})
        case ClusterConstraint.HULL:
            N, B = points.shape[0], len(centroids)
            d_new = d + B * N
            X = p.X.padded(d_new, Box(lo=np.zeros(B * N), hi=np.ones(B * N)))
            E_rows, e = [], []
            for b, where in enumerate(centroids):
                weights = slice(d + b * N, d + (b + 1) * N)
                # x_l - Σ_s λ_s β_s = 0
                for k in range(points.shape[1]):
                    row = np.zeros(d_new)
                    row[where.start + k] = 1.0
                    row[weights] = -points[:, k]
                    E_rows.append(row)
                    e.append(0.0)
                row = np.zeros(d_new)
                row[weights] = 1.0
                E_rows.append(row)
                e.append(1.0)
            X = X.intersect(FeasibleSet(dim=d_new, hyperplanes=[Hyperplanes(E=np.array(E_rows), e=np.array(e))]))
            return SmcProblem(
                name=p.name,
                hbar=p.hbar.padded(d_new),
                terms=[[atom.padded(d_new) for atom in components] for components in p.terms],
                X=X,
                coverage=p.coverage,
                metadata={**p.metadata, "hull_dim": d},
            )
    raise ConfigException(f"未知的聚类约束: {kind}")


# ==================== 实例解析 ====================

@dataclass
class LoadedInstance:
    problem: SmcProblem
    plr: PlrSpec | None = None
    rfl: RflSpec | None = None


def load_instance(instance: InstanceSpec) -> LoadedInstance:
    """按 InstanceSpec 构造实例; PLR / RFL 没有 path 时使用合成数据"""
    from app.repository import get_dataset_mapper, get_instance_mapper

    params = dict(instance.params)
    match instance.source:
        case InstanceSource.BUILTIN:
            if instance.name not in TOY_BUILDERS:
                raise ConfigException(f"未知的内置实例: {instance.name}, 可选 {sorted(TOY_BUILDERS)}")
            return LoadedInstance(TOY_BUILDERS[instance.name]())
        case InstanceSource.JSON:
            return LoadedInstance(get_instance_mapper().load(instance.path))
        case InstanceSource.FULLY_ACTIVE:
            N = int(params.get("N", 2))
            return LoadedInstance(fully_active(N, params.get("n", [2] * N), int(params.get("d", N))))
        case InstanceSource.PLR:
            B1, B2 = int(params.pop("B1", 2)), int(params.pop("B2", 2))
            if instance.path:
                frame = get_dataset_mapper().read_plr(instance.path)
                spec = plr_spec_from_frame(frame, B1, B2, **params)
            else:
                spec = plr_synthetic(int(params.pop("N", 60)), int(params.pop("p", 6)), B1, B2, **params)
            return LoadedInstance(plr_build(spec), plr=spec)
        case InstanceSource.RFL:
            B = int(params.pop("B", 2))
            constraints = [ClusterConstraint(c) for c in params.pop("constraints", [])]
            if instance.path:
                frame = get_dataset_mapper().read_rfl(instance.path)
                spec = rfl_spec_from_frame(frame, B, **params)
            else:
                spec = rfl_synthetic(int(params.pop("N", 12)), B, **params)
            problem = rfl_build(spec)
            for kind in constraints:
                problem = clustering_constraints(problem, spec.beta, rfl_centroids(spec), kind)
            return LoadedInstance(problem, rfl=spec)
    raise ConfigException(f"未知的实例来源: {instance.source}")
