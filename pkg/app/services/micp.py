"""
Big-M 机制

S-bounds M⁽ˢ⁾_{l₊,l} ≥ sup{h_{l₊}(u) - h_l(u) : u ∈ 𝒮, l 在 u 处活跃}, 把每个逐点最小值写成
    η_s ≥ h_{l₊}(x) - C·Σ_l M_{l₊,l}·t_l   ∀ l₊,   Σ_l t_l = 1,   t ∈ {0,1}
C = 1 时模型最优值为 F*, C = 0 时为 "sum of maxima" 凸问题。
"""
import heapq
import itertools
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from app.core import settings
from app.handler.exception_handlers import (
    CapExceededException,
    InfeasibleException,
    MissingBoundsException,
    ShapeMismatchException,
    UnboundedException,
)
from app.model.dto.schedule import Schedule
from app.model.dto.solver import Budget, SolverConfig
from app.model.entity.atoms import Affine, Const, ConvexAtom, MaxAffine, NormAffine
from app.model.entity.bounds import SBounds
from app.model.entity.feasible import FeasibleSet
from app.model.entity.problem import SmcProblem
from app.model.field_enum import CertifyStatus, LocalStrategy, MicpStatus, NormKind
from app.model.vo.verdict import CertifyVerdict, MicpResult, ModelStats, NodeRecord, RestartReport
from app.services.base import BaseService
from app.services.funcs import evaluate, gradient, is_smooth, quadratic_parts, smoothness
from app.services.local import RamService
from app.services.smc import active_indices, all_component_values, degeneracy, objective
from app.services.subsolve import Expr, ModelBuilder, StandardModel, minimize_quadratic_on_ball

# 把 ‖·‖₁ 展开为 MaxAffine 时允许的最大行数 (2^m)
MAX_SIGN_ROWS = 8


def sbounds_crude(h_hi: float, h_lo: float) -> float:
    """M = Ĥ_{l₊} - Ȟ_l"""
    return float(h_hi - h_lo)


def as_max_affine(atom: ConvexAtom, d: int) -> MaxAffine | None:
    """多面体原子的 MaxAffine 表示, 无法 (或不宜) 展开时返回 None"""
    match atom:
        case MaxAffine():
            return atom
        case Affine():
            return MaxAffine(A=atom.a[None, :], b=np.array([atom.b]))
        case Const():
            return MaxAffine(A=np.zeros((1, d)), b=np.array([atom.value]))
        case NormAffine() if atom.p == NormKind.LINF:
            A = atom.w * np.vstack([atom.A, -atom.A])
            return MaxAffine(A=A, b=atom.w * np.concatenate([atom.c, -atom.c]))
        case NormAffine() if atom.p == NormKind.L1 and atom.A.shape[0] <= MAX_SIGN_ROWS:
            signs = np.array(list(itertools.product((1.0, -1.0), repeat=atom.A.shape[0])))
            return MaxAffine(A=atom.w * signs @ atom.A, b=atom.w * signs @ atom.c)
    return None


def interval_upper(atom: ConvexAtom, lo: np.ndarray, hi: np.ndarray) -> float:
    """box 上的区间算术上界"""
    match atom:
        case Const():
            return atom.value
        case Affine():
            return float(atom.b + np.maximum(atom.a * lo, atom.a * hi).sum())
        case MaxAffine():
            return float(np.max(atom.b + np.maximum(atom.A * lo, atom.A * hi).sum(axis=1)))
        case NormAffine():
            row_lo = atom.c + np.minimum(atom.A * lo, atom.A * hi).sum(axis=1)
            row_hi = atom.c + np.maximum(atom.A * lo, atom.A * hi).sum(axis=1)
            magnitude = np.maximum(np.abs(row_lo), np.abs(row_hi))
            order = {NormKind.L1: 1, NormKind.L2: 2, NormKind.LINF: np.inf}[atom.p]
            return float(atom.w * np.linalg.norm(magnitude, ord=order))
    parts = quadratic_parts(atom, lo.shape[0])
    if parts is not None:
        P, a, b = parts
        corners = np.stack([np.outer(lo, lo), np.outer(lo, hi), np.outer(hi, lo), np.outer(hi, hi)])
        quad = np.maximum.reduce([P * c for c in corners]).sum()
        return float(b + np.maximum(a * lo, a * hi).sum() + 0.5 * quad)
    return float(sum(term.weight * interval_upper(term.atom, lo, hi) for term in atom.terms))


def value_function(p: SmcProblem, bounds: SBounds, C: float, x: np.ndarray) -> float:
    """V_C(x) = h̄(x) + (1/N) Σ_s min_{l 可选} max_{l₊} (h_{l₊}(x) - C·M_{l₊,l})"""
    return _value_detail(p, bounds, C, x)[0]


def _value_detail(p: SmcProblem, bounds: SBounds, C: float, x: np.ndarray) -> tuple[float, tuple[int, ...]]:
    if not 0.0 <= C <= 1.0:
        raise ValueError(f"C 必须位于 [0, 1], 实际为 {C}")
    total, sigma = 0.0, []
    for s, h in enumerate(all_component_values(p, x)):
        M = bounds.M[s]
        best, best_l = np.inf, -1
        for l in bounds.selectable(s):
            value = float(np.max(h - C * M[:, l]))
            if value < best:
                best, best_l = value, l
        total += best
        sigma.append(best_l)
    return evaluate(p.hbar, x) + total / p.N, tuple(sigma)


@dataclass
class BigMModel:
    """
    标准形模型 + 二元变量布局

    t_index[s] 把分量下标映射到 t 变量下标, 只有一个可选分量的 term 不建 t
    """
    problem: SmcProblem
    bounds: SBounds
    C: float
    standard: StandardModel
    t_index: list[dict[int, int]]
    eta_index: list[int | None]

    @property
    def binaries(self) -> int:
        return sum(len(index) for index in self.t_index)

    def incumbent(self, x: np.ndarray) -> tuple[float, tuple[int, ...]]:
        """对 x 取最优的整数 t 得到的模型值"""
        return _value_detail(self.problem, self.bounds, self.C, x)


@dataclass
class LocalModel(BigMModel):
    """F̂(·|x̂) 在 X ∩ 𝒮 上的局部模型, C = 1, 只对退化 term 建二元变量"""
    anchor: np.ndarray = field(default_factory=lambda: np.zeros(0))
    rho: float = 0.0
    active: list[list[int]] = field(default_factory=list)
    degenerate: list[int] = field(default_factory=list)

    def incumbent(self, x: np.ndarray) -> tuple[float, tuple[int, ...]]:
        p = self.problem
        total, sigma = 0.0, []
        for s, h in enumerate(all_component_values(p, x)):
            A = self.active[s]
            if s not in self.degenerate:
                total += float(h[A[0]])
                sigma.append(A[0])
                continue
            M = self.bounds.M[s]
            values = [float(max(h[lp] - M[lp, l] for lp in A)) for l in A]
            k = int(np.argmin(values))
            total += values[k]
            sigma.append(A[k])
        return evaluate(p.hbar, x) + total / p.N, tuple(sigma)


def model_stats(model: BigMModel) -> ModelStats:
    std = model.standard
    rows = std.G.shape[0] + std.A.shape[0] + len(std.quads) + len(std.socs)
    return ModelStats(binaries=model.binaries, rows=rows, continuous=std.n - model.binaries)


class SBoundService(BaseService):
    """四类通用 S-bound 计算"""

    def _min_over(self, objective_terms: list[tuple[float, ConvexAtom]], region: FeasibleSet) -> float:
        try:
            _, value = self.solver.solve_objective(objective_terms, region)
        except UnboundedException:
            raise UnboundedException("区域无界, S-bound 不存在")
        return value

    def sbounds_smooth(self, p: SmcProblem, s: int, l_plus: int, l: int, L: float | None = None,
                       D: float | None = None, x_bar: np.ndarray | None = None,
                       region: FeasibleSet | None = None) -> float:
        """
        M = h₊(x̄) - ⟨∇h₊(x̄), x̄⟩ + L·D²/2 - min_{u ∈ 𝒮} [h_l(u) - ⟨∇h₊(x̄), u⟩]

        Args:
            L: ∇h₊ 的 Lipschitz 常数, 默认取 λ_max(P)
            D: 𝒮 的直径, 默认取 bounding box 的对角线
            x_bar: 展开点, 默认取 bounding box 中心
        """
        region = region or p.X
        if not region.is_bounded():
            raise UnboundedException("smooth S-bound 需要有界区域")
        h_plus, h_l = p.terms[s][l_plus], p.terms[s][l]
        lo, hi = region.bounding_box()
        x_bar = 0.5 * (lo + hi) if x_bar is None else np.asarray(x_bar, dtype=float)
        L = smoothness(h_plus) if L is None else L
        D = region.diameter() if D is None else D
        g = gradient(h_plus, x_bar)
        inner = self._min_over([(1.0, h_l), (1.0, Affine(a=-g, b=0.0))], region)
        return float(evaluate(h_plus, x_bar) - g @ x_bar + 0.5 * L * D ** 2 - inner)

    def sbounds_maxaffine(self, p: SmcProblem, s: int, l_plus: int, l: int,
                          region: FeasibleSet | None = None) -> float:
        """M = max_i [b_i - min_{u ∈ 𝒮} (h_l(u) - ⟨a_i, u⟩)]"""
        region = region or p.X
        rows = as_max_affine(p.terms[s][l_plus], p.dim)
        if rows is None:
            raise ShapeMismatchException(f"term {s} 分量 {l_plus} 不是 MaxAffine")
        h_l = p.terms[s][l]
        values = [b_i - self._min_over([(1.0, h_l), (1.0, Affine(a=-a_i, b=0.0))], region)
                  for a_i, b_i in zip(rows.A, rows.b)]
        return float(max(values))

    def sbounds_trs(self, p: SmcProblem, s: int, l_plus: int, l: int, center: np.ndarray | None = None,
                    radius: float | None = None) -> float:
        """
        h₊ - h_l = ½u'Vu + v'u + q₀ 在 B₂(c; R) 上的最大值上界:
        -min_{‖w‖≤R} [½w'(-V - λ̃I)w - (Vc + v)'w + λ̃R²/2] + q(c), λ̃ = min{λ_min(-V), 0}
        """
        if center is None or radius is None:
            balls = [b for b in p.X.balls if b.p == NormKind.L2 and b.indices is None]
            if len(balls) != 1:
                raise ShapeMismatchException("TRS S-bound 需要一个覆盖全部坐标的欧氏球")
            center, radius = balls[0].center, balls[0].radius
        center = np.asarray(center, dtype=float)
        plus = quadratic_parts(p.terms[s][l_plus], p.dim)
        minus = quadratic_parts(p.terms[s][l], p.dim)
        if plus is None or minus is None:
            raise ShapeMismatchException(f"term {s} 的分量差 ({l_plus}, {l}) 不是二次函数")
        V, v, q0 = plus[0] - minus[0], plus[1] - minus[1], plus[2] - minus[2]
        q_center = float(0.5 * center @ V @ center + v @ center + q0)
        lam = float(np.linalg.eigvalsh(-V).min()) if p.dim else 0.0
        lam_t = min(lam, 0.0)
        _, inner = minimize_quadratic_on_ball(-V - lam_t * np.eye(p.dim), -(V @ center + v), radius)
        return float(q_center - (inner + 0.5 * lam_t * radius ** 2))

    def _auto_entry(self, p: SmcProblem, s: int, l_plus: int, l: int, region: FeasibleSet) -> tuple[float, str]:
        h_plus = p.terms[s][l_plus]
        if as_max_affine(h_plus, p.dim) is not None:
            return self.sbounds_maxaffine(p, s, l_plus, l, region), "maxaffine"
        if is_smooth(h_plus):
            return self.sbounds_smooth(p, s, l_plus, l, region=region), "smooth"
        if not region.is_bounded():
            raise UnboundedException("crude S-bound 需要有界区域")
        lo, hi = region.bounding_box()
        h_lo = self._min_over([(1.0, p.terms[s][l])], region)
        return sbounds_crude(interval_upper(h_plus, lo, hi), h_lo), "crude"

    def bound_report(self, p: SmcProblem, region: FeasibleSet | None = None,
                     columns: Sequence[Sequence[int]] | None = None) -> tuple[SBounds, list[list[list[str]]]]:
        """
        对每个 (s, l₊, l) 自动选择计算方法, 结果截断到 ≥ 0

        Args:
            columns: 每个 term 需要计算的列 l, 其余列记为 Forbidden (只用于局部模型)
        Returns:
            (SBounds, 每一项所用的方法名)
        """
        region = region or p.X
        matrices, methods = [], []
        for s, n in enumerate(p.sizes):
            M = np.full((n, n), -np.inf)
            names = [["forbidden"] * n for _ in range(n)]
            wanted = range(n) if columns is None else columns[s]
            for l in wanted:
                for l_plus in range(n):
                    if l_plus == l:
                        M[l_plus, l], names[l_plus][l] = 0.0, "diagonal"
                        continue
                    value, name = self._auto_entry(p, s, l_plus, l, region)
                    M[l_plus, l], names[l_plus][l] = max(value, 0.0), name
            matrices.append(M)
            methods.append(names)
        return SBounds(M=matrices), methods

    def auto_sbounds(self, p: SmcProblem, region: FeasibleSet | None = None,
                     columns: Sequence[Sequence[int]] | None = None) -> SBounds:
        return self.bound_report(p, region, columns)[0]


class MicpService(SBoundService):

    def __init__(self, cfg: SolverConfig | None = None, workers: int = 1):
        super().__init__(cfg)
        self.workers = workers
        self.ram = RamService(solver=self.solver)

    # ---------------------------------------------------------------- 建模

    @staticmethod
    def _check_bounds(p: SmcProblem, bounds: SBounds | None):
        if bounds is None:
            raise MissingBoundsException("缺少 S-bounds")
        if bounds.sizes != p.sizes:
            raise MissingBoundsException(f"S-bounds 形状 {bounds.sizes} 与 problem {p.sizes} 不一致")

    def _add_term(self, builder: ModelBuilder, p: SmcProblem, s: int, rows: Sequence[int],
                  choices: Sequence[int], M: np.ndarray, C: float) -> tuple[dict[int, int], int]:
        """η_s ≥ h_{l₊}(x) - C·Σ_l M_{l₊,l}·t_l,  l₊ ∈ rows, l ∈ choices"""
        eta = builder.add_var(f"eta{s}")
        t_index: dict[int, int] = {}
        if len(choices) > 1:
            for l in choices:
                t_index[l] = builder.add_var(f"t{s}_{l}", lb=0.0, ub=1.0)
            builder.add_eq(Expr({j: 1.0 for j in t_index.values()}, -1.0))
        for l_plus in rows:
            expr = builder.lift(p.terms[s][l_plus], f"h{s}_{l_plus}") + Expr.var(eta, -1.0)
            if t_index:
                expr = expr + Expr({t_index[l]: -C * float(M[l_plus, l]) for l in choices})
            else:
                expr = expr + Expr(const=-C * float(M[l_plus, choices[0]]))
            builder.add_le(expr)
        return t_index, eta

    def build_global_model(self, p: SmcProblem, bounds: SBounds | None, C: float = 1.0) -> BigMModel:
        self._check_bounds(p, bounds)
        if not 0.0 <= C <= 1.0:
            raise ValueError(f"C 必须位于 [0, 1], 实际为 {C}")
        builder = ModelBuilder(p.dim, allow_conic=True)
        builder.add_feasible_set(p.X)
        builder.add_objective([(1.0, p.hbar)])
        t_index, eta_index = [], []
        for s in range(p.N):
            choices = bounds.selectable(s)
            if not choices:
                raise MissingBoundsException(f"term {s} 没有可选分量")
            index, eta = self._add_term(builder, p, s, range(p.sizes[s]), choices, bounds.M[s], C)
            t_index.append(index)
            eta_index.append(eta)
            builder.obj = builder.obj + Expr.var(eta, 1.0 / p.N)
        if p.coverage:
            for l in range(p.sizes[0]):
                # 只有一个可选分量的 term 恒选中该分量
                if any(not index and bounds.selectable(s) == [l] for s, index in enumerate(t_index)):
                    continue
                ts = [index[l] for index in t_index if l in index]
                if not ts:
                    raise MissingBoundsException(f"coverage 约束下分量 {l} 不可选")
                builder.add_le(Expr({j: -1.0 for j in ts}, 1.0))
        return BigMModel(problem=p, bounds=bounds, C=C, standard=builder.build(), t_index=t_index,
                         eta_index=eta_index)

    def build_local_model(self, p: SmcProblem, x_hat: np.ndarray, rho: float, region: FeasibleSet,
                          local_bounds: SBounds | None = None) -> LocalModel:
        """
        只对退化 term s ∈ I(x̂) 与活跃分量 l ∈ A_ρ⁽ˢ⁾(x̂) 建二元变量, Z = Σ_{s∈I} |A⁽ˢ⁾|

        Args:
            region: 邻域 𝒮, 模型的可行域为 X ∩ 𝒮
            local_bounds: 在 X ∩ 𝒮 上有效的 S-bounds, 为空时自动计算活跃列
        """
        x_hat = np.asarray(x_hat, dtype=float)
        H = all_component_values(p, x_hat)
        active = [active_indices(h, rho) for h in H]
        degenerate = [s for s, A in enumerate(active) if len(A) >= 2]
        feasible = p.X.intersect(region)
        if local_bounds is None:
            local_bounds = self.auto_sbounds(p, feasible, columns=active) if degenerate else \
                SBounds(M=[np.zeros((n, n)) for n in p.sizes])
        self._check_bounds(p, local_bounds)
        for s in degenerate:
            block = local_bounds.M[s][np.ix_(active[s], active[s])]
            if not np.all(np.isfinite(block)):
                raise MissingBoundsException(f"term {s} 的活跃分量之间缺少有限 S-bound")

        builder = ModelBuilder(p.dim, allow_conic=True)
        builder.add_feasible_set(feasible)
        builder.add_objective([(1.0, p.hbar)])
        t_index: list[dict[int, int]] = [{} for _ in range(p.N)]
        eta_index: list[int | None] = [None] * p.N
        for s in range(p.N):
            if s not in degenerate:
                builder.add_objective([(1.0 / p.N, p.terms[s][active[s][0]])])
                continue
            t_index[s], eta_index[s] = self._add_term(builder, p, s, active[s], active[s], local_bounds.M[s], 1.0)
            builder.obj = builder.obj + Expr.var(eta_index[s], 1.0 / p.N)
        return LocalModel(problem=p, bounds=local_bounds, C=1.0, standard=builder.build(), t_index=t_index,
                          eta_index=eta_index, anchor=x_hat, rho=rho, active=active, degenerate=degenerate)

    # ---------------------------------------------------------------- 分支定界

    def _relax(self, model: BigMModel, fixing: tuple[int, ...]):
        """fixing[s] = -1 表示 term s 未固定"""
        std = model.standard
        lb, ub = std.lb.copy(), std.ub.copy()
        for s, l_fixed in enumerate(fixing):
            if l_fixed < 0:
                continue
            for l, j in model.t_index[s].items():
                lb[j] = ub[j] = 1.0 if l == l_fixed else 0.0
        try:
            solution = self.solver.solve_model(std.with_bounds(lb, ub))
        except InfeasibleException:
            return None
        return solution

    def _branch_term(self, model: BigMModel, z: np.ndarray, fixing: tuple[int, ...]) -> int:
        """最分数化的 term (并列取最小下标), 全部整数时返回 -1"""
        tol = settings.micp.integrality_tol
        best_s, best_frac = -1, tol
        for s, index in enumerate(model.t_index):
            if fixing[s] >= 0 or len(index) < 2:
                continue
            frac = 1.0 - max(z[j] for j in index.values())
            if frac > best_frac:
                best_s, best_frac = s, frac
        return best_s

    @staticmethod
    def _rounded_selection(model: BigMModel, z: np.ndarray) -> tuple[int, ...]:
        sigma = []
        for s, index in enumerate(model.t_index):
            if index:
                sigma.append(max(index, key=lambda l: z[index[l]]))
            elif isinstance(model, LocalModel):
                sigma.append(model.active[s][0])
            else:
                sigma.append(model.bounds.selectable(s)[0])
        return tuple(sigma)

    def solve_micp(self, model: BigMModel, budget: Budget | None = None) -> MicpResult:
        """
        best-first 分支定界: 节点按 (松弛下界, 固定向量) 排序, 松弛为 t ∈ [0,1] 的凸问题

        Returns:
            树遍历完毕为 OPTIMAL; 预算耗尽时有 incumbent 为 FEASIBLE, 否则 NO_SOLUTION
        """
        budget = budget or Budget()
        tic = time.perf_counter()
        node_log: list[NodeRecord] = []
        if budget.time_limit <= 0 or budget.node_cap <= 0:
            return MicpResult(status=MicpStatus.NO_SOLUTION)

        counter = itertools.count()
        root_key = tuple(-1 for _ in model.t_index)
        root = self._relax(model, root_key)
        solved = 1
        if root is None:
            node_log.append(NodeRecord(node_id=0, key=root_key, parent=None, bound=None, status="infeasible"))
            return MicpResult(status=MicpStatus.INFEASIBLE, nodes=1, node_log=node_log)

        inc_value, inc_x, inc_sigma = np.inf, None, None
        heap: list = []

        def consider(solution, node_id: int, key: tuple[int, ...], parent: int | None):
            nonlocal inc_value, inc_x, inc_sigma
            if solution is None:
                node_log.append(NodeRecord(node_id=node_id, key=key, parent=parent, bound=None, status="infeasible"))
                return
            # coverage 约束下逐 term 取最优的 t 未必可行, 只用整数节点更新 incumbent
            if not model.problem.coverage or isinstance(model, LocalModel):
                x = solution.z[:model.problem.dim]
                value, sigma = model.incumbent(x)
                if value < inc_value - 1e-12:
                    inc_value, inc_x, inc_sigma = value, x, sigma
            heapq.heappush(heap, (solution.value, key, node_id, parent, solution.z))

        consider(root, next(counter), root_key, None)
        exhausted = True
        while heap:
            bound, key, node_id, parent, z = heapq.heappop(heap)
            tol = settings.micp.certify_tol * max(1.0, abs(inc_value)) if np.isfinite(inc_value) else 0.0
            if bound >= inc_value - tol:
                node_log.append(NodeRecord(node_id=node_id, key=key, parent=parent, bound=bound, status="pruned"))
                continue
            s = self._branch_term(model, z, key)
            if s < 0:
                if bound < inc_value - 1e-12:
                    inc_value, inc_x = bound, z[:model.problem.dim]
                    inc_sigma = self._rounded_selection(model, z)
                node_log.append(NodeRecord(node_id=node_id, key=key, parent=parent, bound=bound, status="integral"))
                continue
            if time.perf_counter() - tic > budget.time_limit or solved >= budget.node_cap:
                exhausted = False
                node_log.append(NodeRecord(node_id=node_id, key=key, parent=parent, bound=bound, status="open"))
                break
            node_log.append(NodeRecord(node_id=node_id, key=key, parent=parent, bound=bound, status="branched"))
            children = [key[:s] + (l,) + key[s + 1:] for l in sorted(model.t_index[s])]
            if self.workers > 1:
                with ThreadPoolExecutor(max_workers=self.workers) as pool:
                    solutions = list(pool.map(lambda child: self._relax(model, child), children))
            else:
                solutions = [self._relax(model, child) for child in children]
            solved += len(children)
            for child, solution in zip(children, solutions):
                consider(solution, next(counter), child, node_id)

        if inc_x is None:
            return MicpResult(status=MicpStatus.NO_SOLUTION, nodes=solved, node_log=node_log)
        status = MicpStatus.OPTIMAL if exhausted else MicpStatus.FEASIBLE
        self.logger.debug(f"分支定界结束: {status.value}, 节点 {solved}, 值 {inc_value:.10g}")
        return MicpResult(status=status, value=inc_value, x=inc_x, selection=inc_sigma, nodes=solved,
                          node_log=node_log)

    # ---------------------------------------------------------------- 局部验证

    def local_enumeration(self, p: SmcProblem, x_hat: np.ndarray, rho: float, region: FeasibleSet,
                          threshold: int | None = None) -> tuple[float, np.ndarray, tuple[int, ...]]:
        """min_{σ ∈ ×A⁽ˢ⁾(x̂)} min_{x ∈ X ∩ 𝒮} F_σ(x), 并列取字典序最小的 σ"""
        threshold = settings.micp.enumeration_threshold if threshold is None else threshold
        active = [active_indices(h, rho) for h in all_component_values(p, x_hat)]
        factor = math.prod(len(A) for A in active)
        if factor > threshold:
            raise CapExceededException(f"退化因子 {factor} 超过枚举阈值 {threshold}")
        feasible = p.X.intersect(region)
        best_value, best_x, best_sigma = np.inf, None, None
        for sigma in itertools.product(*active):
            x, value = self.solver.solve_objective(p.piece_objective(sigma), feasible)
            if value < best_value - 1e-12 * max(1.0, abs(value)):
                best_value, best_x, best_sigma = value, x, sigma
        return best_value, best_x, best_sigma

    def certify_or_improve(self, p: SmcProblem, x_hat: np.ndarray, rho: float | None = None,
                           region: FeasibleSet | None = None, delta_glob: float | None = None,
                           budget: Budget | None = None, local_bounds: SBounds | None = None) -> CertifyVerdict:
        """
        在邻域 𝒮 上求 F̂*_{x̂,𝒮}: 若找到 F(x) ≤ F(x̂) - δ_glob 则 Improved,
        若 F̂* ≥ F(x̂) - 1e-9 且求解到最优则 CertifiedLocalMin, 否则 Inconclusive
        """
        rho = settings.local.rho if rho is None else rho
        delta_glob = settings.micp.delta_glob if delta_glob is None else delta_glob
        budget = budget or Budget()
        region = region or p.X
        x_hat = np.asarray(x_hat, dtype=float)
        value_hat = objective(p, x_hat)
        degenerate, factor = degeneracy(p, x_hat, rho)
        verdict = {"x_hat": x_hat, "value_hat": value_hat, "degeneracy_factor": factor}
        if budget.time_limit <= 0:
            return CertifyVerdict(status=CertifyStatus.INCONCLUSIVE, **verdict)

        if factor <= settings.micp.enumeration_threshold:
            local_value, x_star, _ = self.local_enumeration(p, x_hat, rho, region)
            optimal, nodes, binaries, strategy = True, factor, 0, LocalStrategy.ENUMERATION
        else:
            model = self.build_local_model(p, x_hat, rho, region, local_bounds)
            result = self.solve_micp(model, budget)
            binaries, nodes, strategy = model.binaries, result.nodes, LocalStrategy.MICP
            if result.x is None:
                self.logger.info(f"局部 MICP 无解 ({result.status.value}), 结论不确定")
                return CertifyVerdict(status=CertifyStatus.INCONCLUSIVE, binaries=binaries, strategy=strategy,
                                      nodes=nodes, **verdict)
            local_value, x_star, optimal = result.value, result.x, result.status == MicpStatus.OPTIMAL
        verdict.update(binaries=binaries, strategy=strategy, nodes=nodes, local_value=local_value)

        value_star = objective(p, x_star)
        if value_star <= value_hat - delta_glob:
            status = CertifyStatus.IMPROVED
        elif optimal and local_value >= value_hat - settings.micp.certify_tol:
            status = CertifyStatus.CERTIFIED
        else:
            status = CertifyStatus.INCONCLUSIVE
        self.logger.info(f"certify: F(x̂) = {value_hat:.10g}, F̂* = {local_value:.10g}, "
                         f"退化因子 {factor}, 结论 {status.value}")
        return CertifyVerdict(status=status, x=x_star, value=value_star, **verdict)

    def certify_and_restart(self, p: SmcProblem, x_hat: np.ndarray,
                            neighbourhood: Callable[[np.ndarray], FeasibleSet],
                            schedule: Schedule | None = None,
                            local_bounds: Callable[[np.ndarray], SBounds | None] | None = None,
                            rho: float | None = None, delta_glob: float | None = None,
                            budget: Budget | None = None, max_restarts: int | None = None,
                            delta: float | None = None, k_max: int | None = None,
                            seed: int = 0) -> RestartReport:
        """
        certify → Improved 时以新点处的贪心权重重启局部搜索 → 再 certify, 直到 Certified / Inconclusive

        Args:
            neighbourhood: x̂ ↦ 𝒮
            local_bounds: x̂ ↦ 在 X ∩ 𝒮 上有效的 S-bounds, 为空时自动计算
        """
        schedule = schedule or Schedule.preset("am")
        max_restarts = settings.micp.max_restarts if max_restarts is None else max_restarts
        x = np.asarray(x_hat, dtype=float)
        initial = objective(p, x)
        verdicts: list[CertifyVerdict] = []
        restarts = 0
        while True:
            bounds = local_bounds(x) if local_bounds is not None else None
            verdict = self.certify_or_improve(p, x, rho, neighbourhood(x), delta_glob, budget, bounds)
            verdicts.append(verdict)
            if verdict.status != CertifyStatus.IMPROVED or restarts >= max_restarts:
                break
            restarts += 1
            trace = self.ram.run_from_point(p, verdict.x, schedule, delta=delta, k_max=k_max,
                                            rng=np.random.default_rng(np.random.SeedSequence([seed, restarts])),
                                            start=restarts, seed=seed)
            x = verdict.x if trace.best_x is None or trace.best_value > verdict.value else trace.best_x
            self.logger.info(f"第 {restarts} 次重启: F = {objective(p, x):.10g}")
        final = objective(p, x)
        enhancement = 100.0 * (initial - final) / max(abs(initial), 1e-12)
        return RestartReport(initial_value=initial, final_value=final, final_x=x, restarts=restarts,
                             enhancement_pct=enhancement, verdicts=verdicts)


def get_micp_service(cfg: SolverConfig | None = None, workers: int = 1) -> MicpService:
    return MicpService(cfg, workers)
