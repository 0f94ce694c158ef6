from pydantic import BaseModel, Field, model_validator

from app.model.common import ARRAY_CONFIG, Matrix, Vector
from app.model.field_enum import NormKind


class PlrSpec(BaseModel):
    """分段线性回归: 预测 max_e1 ⟨β, x¹_e1⟩ - max_e2 ⟨β, x²_e2⟩"""
    model_config = ARRAY_CONFIG

    gamma: Vector = Field(description="目标值 γ⁽ˢ⁾")
    beta: Matrix = Field(description="特征 β̄⁽ˢ⁾, 每行一个样本")
    B1: int = Field(ge=1, description="凸部分的仿射片数")
    B2: int = Field(ge=1, description="凹部分的仿射片数")
    L: float = Field(default=100.0, gt=0, description="‖·‖∞ 约束半径")
    norm: NormKind = Field(default=NormKind.L1, description="局部邻域所用范数, 对偶范数用于 S-bounds")

    @model_validator(mode="after")
    def _check(self) -> "PlrSpec":
        if self.gamma.shape[0] < 1 or self.gamma.shape[0] != self.beta.shape[0]:
            raise ValueError("gamma 与 beta 的样本数不一致或为空")
        return self

    @property
    def N(self) -> int:
        return self.gamma.shape[0]

    @property
    def p(self) -> int:
        return self.beta.shape[1]

    @property
    def d(self) -> int:
        return self.p * (self.B1 + self.B2)

    @property
    def n_bar(self) -> int:
        return self.B1 * self.B2

    def e1(self, l: int) -> int:
        return l // self.B2

    def e2(self, l: int) -> int:
        return l % self.B2


class RflSpec(BaseModel):
    """受限选址: x = (R, x₀, x₁, …, x_B)"""
    model_config = ARRAY_CONFIG

    population: Vector = Field(description="城市人口 P⁽ˢ⁾ ≥ 1")
    beta: Matrix = Field(description="城市坐标 β⁽ˢ⁾ ∈ ℝ²")
    B: int = Field(ge=1, description="门店数量")
    R_ref: float = Field(default=1.0, gt=0, description="参考半径")
    penalty: float = Field(default=0.0, ge=0, description="超出参考半径的单位成本 Λ")

    @model_validator(mode="after")
    def _check(self) -> "RflSpec":
        if self.beta.ndim != 2 or self.beta.shape[1] != 2:
            raise ValueError("城市坐标必须是 N×2 矩阵")
        if self.population.shape[0] != self.beta.shape[0] or self.population.shape[0] < 1:
            raise ValueError("population 与坐标数量不一致或为空")
        if (self.population < 1).any():
            raise ValueError("人口必须 ≥ 1")
        return self

    @property
    def N(self) -> int:
        return self.population.shape[0]

    @property
    def d(self) -> int:
        return 1 + 2 * (self.B + 1)

    def store_slice(self, l: int) -> slice:
        """x_l 在决策向量中的位置, l = 0 为配送中心"""
        start = 1 + 2 * l
        return slice(start, start + 2)
