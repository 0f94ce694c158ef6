"""
双凸重构上的局部搜索: AM, r-AM (BB / SM / MM 候选), ALTER 与 DCA

F̄(x, Q) = h̄(x) + (1/N) Σ_s ⟨q⁽ˢ⁾, 𝐡⁽ˢ⁾(x)⟩, 对 x 与 Q 分别是凸的。
每轮: x_k = argmin_x F̄(x, Q_k), 然后按计划把贪心顶点 q* 与探索候选 q̂ 做凸组合。
"""
import time
from typing import Sequence

import numpy as np

from app.core import settings
from app.handler.exception_handlers import InfeasibleException, SmcException
from app.model.dto.schedule import Schedule
from app.model.dto.solver import SolverConfig
from app.model.entity.atoms import Affine, ConvexAtom, Sum, SumTerm
from app.model.entity.feasible import Box, FeasibleSet, Halfspaces, Hyperplanes
from app.model.entity.problem import SmcProblem, WeightedSubproblem
from app.model.entity.weights import Weights
from app.model.field_enum import CandidateKind, CriticalityStatus, EpsilonRule, Termination
from app.model.vo.trace import IterRecord, RunTrace
from app.model.vo.verdict import CriticalityVerdict
from app.services.base import BaseService
from app.services.funcs import evaluate, greedy_vertex, project_simplex, softmin, subgradient
from app.services.smc import all_component_values, objective

# 候选 SM 的归一化下限
SM_FLOOR = 1e-4


def _surrogate(hbar_value: float, weights: Sequence[np.ndarray], H: Sequence[np.ndarray]) -> float:
    return hbar_value + sum(float(q @ h) for q, h in zip(weights, H)) / len(H)


def _covers(weights: Sequence[np.ndarray], tol: float = 1e-12) -> bool:
    return bool(np.all(np.sum(weights, axis=0) >= 1.0 - tol))


def _clean(q: np.ndarray) -> np.ndarray:
    q = np.maximum(q, 0.0)
    return q / q.sum()


def gain_from_values(weights: Sequence[np.ndarray], greedy: Sequence[np.ndarray], H: Sequence[np.ndarray]) -> float:
    return sum(float((q - q_star) @ h) for q, q_star, h in zip(weights, greedy, H)) / len(H)


def candidate_bb(q: np.ndarray, active_min_index: int, kappa: float) -> np.ndarray:
    """proj_Δ(q + κ·u), u 在最小活跃下标处为 +1, 其余为 -1"""
    u = -np.ones(q.shape[0])
    u[active_min_index] = 1.0
    return project_simplex(np.asarray(q, dtype=float) + kappa * u)


def candidate_sm(h: np.ndarray, kappa: float, rng: np.random.Generator | None = None,
                 perturbation: float | None = None, normalize: bool = True) -> np.ndarray:
    """softmin(κ·(𝐡 + u) / max{1e-4, |⟨1, 𝐡⟩|}), u ~ U[-a, a]^{n_s}"""
    h = np.asarray(h, dtype=float)
    a = settings.local.perturbation if perturbation is None else perturbation
    u = rng.uniform(-a, a, size=h.shape[0]) if (rng is not None and a > 0) else np.zeros(h.shape[0])
    scale = max(SM_FLOOR, abs(float(h.sum()))) if normalize else 1.0
    return softmin(kappa * (h + u) / scale)


def candidate_mm(h: np.ndarray, kappa: float) -> np.ndarray:
    """proj_Δ(κ·(max 𝐡 - 𝐡) / (max 𝐡 - min 𝐡)), 𝐡 为常数时返回均匀分布"""
    h = np.asarray(h, dtype=float)
    spread = float(h.max() - h.min())
    if spread == 0:
        return np.full(h.shape[0], 1.0 / h.shape[0])
    return project_simplex(kappa * (h.max() - h) / spread)


def exploration_epsilon(q: np.ndarray, q_star: np.ndarray, q_hat: np.ndarray, h: np.ndarray,
                        C: float, guard: float | None = None) -> float:
    """ε = min{1, C·⟨q - q*, 𝐡⟩ / ⟨q̂ - q*, 𝐡⟩}, 分母 ≤ guard 时取 1"""
    guard = settings.local.epsilon_guard if guard is None else guard
    denominator = float((q_hat - q_star) @ h)
    if denominator <= guard:
        return 1.0
    return float(min(1.0, C * float((q - q_star) @ h) / denominator))


def q_update(q_star: np.ndarray, q_hat: np.ndarray, epsilon: float) -> np.ndarray:
    """ε·q̂ + (1 - ε)·q*"""
    return epsilon * q_hat + (1.0 - epsilon) * q_star


def sample_weights(sizes: Sequence[int], rng: np.random.Generator) -> Weights:
    """𝒬 上的均匀分布: 每个单纯形上 Dirichlet(1), 即归一化的指数变量"""
    rows = []
    for n in sizes:
        e = rng.exponential(1.0, size=n)
        rows.append(e / e.sum())
    return Weights(q=rows)


def start_streams(seed: int, start: int) -> tuple[np.random.Generator, np.random.Generator]:
    """(初始权重, 运行时扰动) 两个互相独立的随机流"""
    init_seq, run_seq = np.random.SeedSequence([seed, start]).spawn(2)
    return np.random.default_rng(init_seq), np.random.default_rng(run_seq)


class LocalSearchService(BaseService):
    """贪心权重、gain 与临界性判定"""

    def greedy_weights(self, p: SmcProblem, x: np.ndarray, H: list[np.ndarray] | None = None) -> Weights:
        """argmin_{Q ∈ 𝒬} F̄(x, Q); coverage 约束下由 LP 求得"""
        H = all_component_values(p, x) if H is None else H
        if not p.coverage:
            return Weights(q=[greedy_vertex(h) for h in H])
        return Weights(q=self._coverage_greedy(H))

    def _coverage_greedy(self, H: list[np.ndarray]) -> list[np.ndarray]:
        N, n = len(H), H[0].shape[0]
        if N < n:
            raise InfeasibleException(f"coverage 约束要求 N ≥ n_s, 实际 N = {N}, n_s = {n}")
        E = np.kron(np.eye(N), np.ones((1, n)))
        G = -np.kron(np.ones((1, N)), np.eye(n))
        X = FeasibleSet(
            dim=N * n,
            box=Box.uniform(N * n, 0.0, 1.0),
            hyperplanes=[Hyperplanes(E=E, e=np.ones(N))],
            halfspaces=[Halfspaces(G=G, g=-np.ones(n))],
        )
        z, _ = self.solver.solve_objective([(1.0, Affine(a=np.concatenate(H) / N))], X)
        return [_clean(row) for row in z.reshape(N, n)]

    def gain(self, p: SmcProblem, x: np.ndarray, weights: Weights) -> float:
        """𝒢* = F̄(x₊, Q) - min_Q̃ F̄(x₊, Q̃)"""
        H = all_component_values(p, x)
        return gain_from_values(weights.q, self.greedy_weights(p, x, H).q, H)

    def criticality_certificate(self, p: SmcProblem, x: np.ndarray, weights: Weights,
                                tol: float = 1e-9) -> CriticalityVerdict:
        """gain ≤ tol 是临界点的充分条件, 反之不成立"""
        g = self.gain(p, x, weights)
        status = CriticalityStatus.CRITICAL if g <= tol else CriticalityStatus.UNKNOWN
        return CriticalityVerdict(status=status, gain=g)


class RamService(LocalSearchService):

    def _candidate(self, schedule: Schedule, q: np.ndarray, h: np.ndarray, kappa: float,
                   rng: np.random.Generator) -> np.ndarray:
        match schedule.candidate:
            case CandidateKind.BB:
                return candidate_bb(q, int(np.argmin(h)), kappa)
            case CandidateKind.SM:
                return candidate_sm(h, kappa, rng, schedule.perturbation, schedule.normalize)
            case CandidateKind.MM:
                return candidate_mm(h, kappa)
        return greedy_vertex(h)

    def _epsilon(self, schedule: Schedule, k: int, q, q_star, q_hat, h, C: float) -> float:
        match schedule.epsilon_rule:
            case EpsilonRule.ZERO:
                return 0.0
            case EpsilonRule.ONE:
                return 1.0
            case EpsilonRule.ALTERNATE:
                return 1.0 if k % 2 == 0 else 0.0
        return exploration_epsilon(q, q_star, q_hat, h, C)

    def run(self, p: SmcProblem, q_init: Weights, schedule: Schedule, delta: float | None = None,
            k_max: int | None = None, rng: np.random.Generator | None = None, start: int = 0,
            seed: int | None = None) -> RunTrace:
        """
        r-AM (Q_init)

        Args:
            delta: 停止阈值 δ, 取 -inf 时只按 K_max 停止
            rng: SM 候选扰动的随机流
        Returns:
            RunTrace, best_x 为全部迭代点中 F 最小者 (并列取最早)
        """
        delta = settings.local.delta if delta is None else delta
        k_max = settings.local.k_max if k_max is None else k_max
        rng = rng or np.random.default_rng(0)
        records: list[IterRecord] = []
        best_x, best_value, best_k = None, np.inf, None
        termination, message = Termination.K_MAX, None
        weights = q_init
        upsilon = np.inf
        for k in range(1, k_max + 1):
            tic = time.perf_counter()
            try:
                x, _ = self.solver.solve_convex(WeightedSubproblem(problem=p, weights=weights))
            except SmcException as exc:
                termination, message = Termination.SOLVER_ERROR, f"{exc.__class__.__name__}: {exc.msg}"
                self.logger.warning(f"[{schedule.name}#{start}] 第 {k} 轮子问题求解失败: {exc.msg}")
                break
            H = all_component_values(p, x)
            hbar_value = evaluate(p.hbar, x)
            f = hbar_value + sum(float(h.min()) for h in H) / p.N
            fb = _surrogate(hbar_value, weights.q, H)
            greedy = self.greedy_weights(p, x, H).q
            g = gain_from_values(weights.q, greedy, H)
            C = schedule.c_at(k)
            kappa = schedule.kappa_at(k)

            next_q, epsilons = [], []
            for q, q_star, h in zip(weights.q, greedy, H):
                q_hat = self._candidate(schedule, q, h, kappa, rng)
                eps = self._epsilon(schedule, k, q, q_star, q_hat, h, C)
                next_q.append(_clean(q_update(q_star, q_hat, eps)))
                epsilons.append(eps)
            if p.coverage and not _covers(next_q):
                next_q, epsilons = list(greedy), [0.0] * p.N

            if f < best_value:
                best_x, best_value, best_k = x, f, k
            records.append(IterRecord(
                k=k, x=x, fbar=fb, f=f, gain=g, epsilon_min=min(epsilons),
                decrease=fb - _surrogate(hbar_value, next_q, H), c=C,
                time_ms=(time.perf_counter() - tic) * 1000.0,
            ))
            if upsilon - f < delta:
                termination = Termination.DELTA
                break
            weights = Weights(q=next_q)
            upsilon = fb

        self.logger.debug(f"[{schedule.name}#{start}] {len(records)} 轮, 终止原因 {termination.value}, "
                          f"F_best = {best_value:.10g}")
        return RunTrace(method=schedule.name, start=start, seed=seed, records=records, best_x=best_x,
                        best_value=float(best_value), best_k=best_k, termination=termination, message=message)

    def run_from_point(self, p: SmcProblem, x: np.ndarray, schedule: Schedule, **kwargs) -> RunTrace:
        """Q_init 取 x 处的贪心权重"""
        return self.run(p, self.greedy_weights(p, x), schedule, **kwargs)


class DcaService(LocalSearchService):
    """
    f₁ = h̄ + (1/N) Σ_s Σ_l h_l,  f₂ = (1/N) Σ_s max_l Σ_{l'≠l} h_l'
    x_{k+1} = argmin_x f₁(x) - ⟨∂f₂(x_k), x⟩
    """

    def step_objective(self, p: SmcProblem, x: np.ndarray) -> list[tuple[float, ConvexAtom]]:
        """f₁ 减去 f₂ 在 x 处的线性化; 仿射分量与其线性化相消, 只剩常数, 直接略去"""
        objective_terms: list[tuple[float, ConvexAtom]] = [(1.0, p.hbar)]
        for h, components in zip(all_component_values(p, x), p.terms):
            chosen = int(np.argmin(h))
            objective_terms.append((1.0 / p.N, components[chosen]))
            for l, atom in enumerate(components):
                if l == chosen or isinstance(atom, Affine):
                    continue
                linear = Affine(a=-subgradient(atom, x), b=0.0)
                objective_terms.append((1.0 / p.N, Sum(terms=[SumTerm(weight=1.0, atom=atom),
                                                             SumTerm(weight=1.0, atom=linear)])))
        return objective_terms

    def run(self, p: SmcProblem, x_init: np.ndarray, delta: float | None = None, k_max: int | None = None,
            start: int = 0, seed: int | None = None) -> RunTrace:
        """第 1 条记录即 x_init, 当 F(x_{k-1}) - F(x_k) < δ 时停止"""
        delta = settings.local.delta if delta is None else delta
        k_max = settings.local.k_max if k_max is None else k_max
        records: list[IterRecord] = []
        termination, message = Termination.K_MAX, None
        x = np.asarray(x_init, dtype=float)
        previous = np.inf
        best_x, best_value, best_k = None, np.inf, None
        for k in range(1, k_max + 1):
            tic = time.perf_counter()
            if k > 1:
                try:
                    x, _ = self.solver.solve_objective(self.step_objective(p, x), p.X)
                except SmcException as exc:
                    termination, message = Termination.SOLVER_ERROR, f"{exc.__class__.__name__}: {exc.msg}"
                    self.logger.warning(f"[dca#{start}] 第 {k} 轮子问题求解失败: {exc.msg}")
                    break
            f = objective(p, x)
            if f < best_value:
                best_x, best_value, best_k = x, f, k
            records.append(IterRecord(k=k, x=x, fbar=f, f=f, gain=0.0,
                                      decrease=0.0 if k == 1 else previous - f,
                                      time_ms=(time.perf_counter() - tic) * 1000.0))
            if previous - f < delta:
                termination = Termination.DELTA
                break
            previous = f
        self.logger.debug(f"[dca#{start}] {len(records)} 轮, 终止原因 {termination.value}, F_best = {best_value:.10g}")
        return RunTrace(method="dca", start=start, seed=seed, records=records, best_x=best_x,
                        best_value=float(best_value), best_k=best_k, termination=termination, message=message)


def get_ram_service(cfg: SolverConfig | None = None) -> RamService:
    return RamService(cfg)


def get_dca_service(cfg: SolverConfig | None = None) -> DcaService:
    return DcaService(cfg)
