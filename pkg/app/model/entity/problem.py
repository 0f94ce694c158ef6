import itertools
import math
from typing import Any, Iterator, Sequence

from pydantic import BaseModel, Field, model_validator

from app.model.common import ARRAY_CONFIG
from app.model.entity.atoms import Const, ConvexAtom
from app.model.entity.feasible import FeasibleSet
from app.model.entity.weights import Weights


class SmcProblem(BaseModel):
    """
    min_{x ∈ X} h̄(x) + (1/N) Σ_s min_l h_l⁽ˢ⁾(x)
    """
    model_config = ARRAY_CONFIG

    name: str = Field(default="smc", description="实例名称")
    hbar: ConvexAtom = Field(default_factory=lambda: Const(value=0.0), description="主函数 h̄")
    terms: list[list[ConvexAtom]] = Field(description="N 个 term, 每个 term 是 n_s 个分量函数")
    X: FeasibleSet = Field(description="可行集")
    coverage: bool = Field(default=False, description="是否要求每个分量下标至少被一个 term 选中")
    metadata: dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check(self) -> "SmcProblem":
        if not self.terms:
            raise ValueError("N 必须 ≥ 1")
        d = self.X.dim
        for s, components in enumerate(self.terms):
            if not components:
                raise ValueError(f"term {s} 没有分量函数")
            for atom in components:
                if atom.dim not in (None, d):
                    raise ValueError(f"term {s} 中分量维度 {atom.dim} != {d}")
        if self.hbar.dim not in (None, d):
            raise ValueError(f"h̄ 维度 {self.hbar.dim} != {d}")
        if self.coverage and len(set(self.sizes)) != 1:
            raise ValueError("coverage 约束要求所有 term 的分量个数相同")
        return self

    @property
    def dim(self) -> int:
        return self.X.dim

    @property
    def N(self) -> int:
        return len(self.terms)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(components) for components in self.terms)

    @property
    def n_pieces(self) -> int:
        return math.prod(self.sizes)

    def selections(self) -> Iterator[tuple[int, ...]]:
        """按字典序遍历全部 σ"""
        return itertools.product(*(range(n) for n in self.sizes))

    def covers(self, sigma: Sequence[int]) -> bool:
        return not self.coverage or set(sigma) == set(range(self.sizes[0]))

    def piece_objective(self, sigma: Sequence[int]) -> list[tuple[float, ConvexAtom]]:
        """F_σ = h̄ + (1/N) Σ_s h⁽ˢ⁾_{σ_s}"""
        return [(1.0, self.hbar), *((1.0 / self.N, self.terms[s][l]) for s, l in enumerate(sigma))]


class Selection(BaseModel):
    sigma: tuple[int, ...]

    def check(self, sizes: Sequence[int]) -> "Selection":
        if len(self.sigma) != len(sizes) or any(not 0 <= l < n for l, n in zip(self.sigma, sizes)):
            raise ValueError(f"selection {self.sigma} 与分量个数 {tuple(sizes)} 不匹配")
        return self


class WeightedSubproblem(BaseModel):
    """x*_{|Q} 的目标: h̄ + (1/N) Σ_s Σ_l q_l⁽ˢ⁾ h_l⁽ˢ⁾"""
    model_config = ARRAY_CONFIG

    problem: SmcProblem
    weights: Weights

    @model_validator(mode="after")
    def _check(self) -> "WeightedSubproblem":
        if self.weights.sizes != self.problem.sizes:
            raise ValueError(f"权重形状 {self.weights.sizes} 与 problem {self.problem.sizes} 不一致")
        return self

    def objective(self) -> list[tuple[float, ConvexAtom]]:
        # 权重为 0 的分量不进入子问题
        p = self.problem
        terms: list[tuple[float, ConvexAtom]] = [(1.0, p.hbar)]
        for qs, components in zip(self.weights.q, p.terms):
            for weight, atom in zip(qs, components):
                if weight > 0:
                    terms.append((float(weight) / p.N, atom))
        return terms
