import math

from pydantic import BaseModel, Field, model_validator

from app.core import settings
from app.model.field_enum import CandidateKind, CRule, EpsilonRule, KappaRule, MethodName


class Schedule(BaseModel):
    """
    r-AM 的权重更新计划: κ_k, C_k, ε 规则与候选类型, k 从 1 开始计数
    """
    name: str = Field(default="custom", description="计划名称")
    candidate: CandidateKind = Field(default=CandidateKind.NONE, description="探索候选")
    epsilon_rule: EpsilonRule = Field(default=EpsilonRule.ZERO, description="ε 的取法")
    kappa_rule: KappaRule = Field(default=KappaRule.CONSTANT, description="κ_k 的取法")
    kappa: float = Field(default=0.1, ge=0, description="常数 κ")
    c_rule: CRule = Field(default=CRule.DEFAULT, description="C_k 的取法")
    c_value: float = Field(default=0.5, ge=0, lt=1, description="常数 C")
    normalize: bool = Field(default=True, description="softmin 候选是否按 max{1e-4, |⟨1,h⟩|} 归一化")
    perturbation: float = Field(default_factory=lambda: settings.local.perturbation, ge=0,
                                description="softmin 候选的均匀扰动半宽")

    @model_validator(mode="after")
    def _check(self) -> "Schedule":
        if self.epsilon_rule in (EpsilonRule.DECREASE, EpsilonRule.ONE, EpsilonRule.ALTERNATE) \
                and self.candidate == CandidateKind.NONE:
            raise ValueError(f"ε 规则 {self.epsilon_rule.value} 需要指定候选类型")
        return self

    def kappa_at(self, k: int) -> float:
        match self.kappa_rule:
            case KappaRule.CONSTANT:
                return self.kappa
            case KappaRule.SOFTMIN_GROWTH:
                return 1.5 ** (k ** 0.75)
            case KappaRule.POWER:
                return k ** (2.0 / 3.0)

    def c_at(self, k: int) -> float:
        if self.c_rule == CRule.CONSTANT:
            return self.c_value
        return 2.0 / (math.sqrt(k - 1) + 3.0)

    @classmethod
    def preset(cls, name: MethodName | str) -> "Schedule":
        name = MethodName(name)
        match name:
            case MethodName.AM | MethodName.DCA:
                return cls(name=name.value)
            case MethodName.BB:
                return cls(name="bb", candidate=CandidateKind.BB, epsilon_rule=EpsilonRule.ONE,
                           kappa_rule=KappaRule.CONSTANT, kappa=0.1)
            case MethodName.SM:
                return cls(name="sm", candidate=CandidateKind.SM, epsilon_rule=EpsilonRule.DECREASE,
                           kappa_rule=KappaRule.SOFTMIN_GROWTH)
            case MethodName.MM:
                return cls(name="mm", candidate=CandidateKind.MM, epsilon_rule=EpsilonRule.DECREASE,
                           kappa_rule=KappaRule.POWER)
            case MethodName.ALTER:
                # 奇数轮贪心, 偶数轮直接采用 softmin(κ·h), κ = 1/4
                return cls(name="alter", candidate=CandidateKind.SM, epsilon_rule=EpsilonRule.ALTERNATE,
                           kappa_rule=KappaRule.CONSTANT, kappa=0.25, normalize=False, perturbation=0.0)
