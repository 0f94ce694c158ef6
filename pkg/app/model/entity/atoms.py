"""
结构化凸函数代数 (ConvexAtom)

所有原子函数在 ℝ^d 上处处有限, 定义域限制一律放到可行集里。
JSON 形如 {"kind": "...", 数值字段为数组}, 字段名见 docs/schema.md。
"""
from typing import Annotated, Literal, Union

import numpy as np
from pydantic import BaseModel, BeforeValidator, Field, TypeAdapter, model_validator

from app.model.common import ARRAY_CONFIG, Matrix, Vector
from app.model.field_enum import NormKind

PSD_FLOOR = -1e-10


def _norm_kind(value):
    if isinstance(value, NormKind) or isinstance(value, bool):
        return value
    if isinstance(value, (int, float)):
        if value == 1:
            return NormKind.L1
        if value == 2:
            return NormKind.L2
        if np.isposinf(value):
            return NormKind.LINF
    if isinstance(value, str) and value.lower() in ("inf", "infinity", "linf"):
        return NormKind.LINF
    return value


NormOrder = Annotated[NormKind, BeforeValidator(_norm_kind)]


def _pad_columns(mat: np.ndarray, d_new: int) -> np.ndarray:
    return np.hstack([mat, np.zeros((mat.shape[0], d_new - mat.shape[1]))])


class AtomBase(BaseModel):
    model_config = ARRAY_CONFIG

    @property
    def dim(self) -> int | None:
        raise NotImplementedError

    def padded(self, d_new: int) -> "AtomBase":
        """在末尾追加 d_new - dim 个不参与的坐标"""
        raise NotImplementedError


class Affine(AtomBase):
    """⟨a, x⟩ + b"""
    kind: Literal["affine"] = "affine"
    a: Vector
    b: float = 0.0

    @property
    def dim(self) -> int:
        return self.a.shape[0]

    def padded(self, d_new: int) -> "Affine":
        return Affine(a=np.concatenate([self.a, np.zeros(d_new - self.dim)]), b=self.b)


class Quadratic(AtomBase):
    """½⟨Px, x⟩ + ⟨a, x⟩ + b, 要求 P 对称且数值半正定"""
    kind: Literal["quadratic"] = "quadratic"
    P: Matrix
    a: Vector
    b: float = 0.0

    @model_validator(mode="after")
    def _check_psd(self) -> "Quadratic":
        d = self.a.shape[0]
        if self.P.shape != (d, d):
            raise ValueError(f"P 的形状 {self.P.shape} 与 a 的长度 {d} 不一致")
        scale = max(1.0, float(np.abs(self.P).max(initial=0.0)))
        if np.abs(self.P - self.P.T).max(initial=0.0) > 1e-9 * scale:
            raise ValueError("P 不是对称矩阵")
        if d > 0 and np.linalg.eigvalsh(self.P).min() < PSD_FLOOR:
            raise ValueError("P 不是半正定矩阵 (最小特征值 < -1e-10)")
        return self

    @property
    def dim(self) -> int:
        return self.a.shape[0]

    def padded(self, d_new: int) -> "Quadratic":
        P = np.zeros((d_new, d_new))
        P[:self.dim, :self.dim] = self.P
        return Quadratic(P=P, a=np.concatenate([self.a, np.zeros(d_new - self.dim)]), b=self.b)


class NormAffine(AtomBase):
    """w·‖Ax + c‖_p, p ∈ {1, 2, ∞}"""
    kind: Literal["norm"] = "norm"
    p: NormOrder
    A: Matrix
    c: Vector
    w: float = Field(default=1.0, ge=0)

    @model_validator(mode="after")
    def _check_shape(self) -> "NormAffine":
        if self.A.shape[0] < 1 or self.A.shape[0] != self.c.shape[0]:
            raise ValueError(f"A 的行数 {self.A.shape[0]} 与 c 的长度 {self.c.shape[0]} 不一致")
        return self

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    def padded(self, d_new: int) -> "NormAffine":
        return NormAffine(p=self.p, A=_pad_columns(self.A, d_new), c=self.c, w=self.w)


class MaxAffine(AtomBase):
    """max_i ⟨a_i, x⟩ + b_i, A 的第 i 行即 a_i"""
    kind: Literal["max_affine"] = "max_affine"
    A: Matrix
    b: Vector

    @model_validator(mode="after")
    def _check_rows(self) -> "MaxAffine":
        if self.A.shape[0] < 1:
            raise ValueError("MaxAffine 至少需要一行")
        if self.A.shape[0] != self.b.shape[0]:
            raise ValueError(f"A 的行数 {self.A.shape[0]} 与 b 的长度 {self.b.shape[0]} 不一致")
        return self

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    def padded(self, d_new: int) -> "MaxAffine":
        return MaxAffine(A=_pad_columns(self.A, d_new), b=self.b)


class Const(AtomBase):
    """常数 λ, 与任意维度兼容"""
    kind: Literal["const"] = "const"
    value: float

    @property
    def dim(self) -> None:
        return None

    def padded(self, d_new: int) -> "Const":
        return self


class SumTerm(BaseModel):
    model_config = ARRAY_CONFIG

    weight: float = Field(ge=0, description="非负权重")
    atom: "ConvexAtom"


class Sum(AtomBase):
    """Σ_i w_i·f_i, w_i ≥ 0"""
    kind: Literal["sum"] = "sum"
    terms: list[SumTerm] = Field(min_length=1)

    @model_validator(mode="after")
    def _check_dims(self) -> "Sum":
        dims = {term.atom.dim for term in self.terms} - {None}
        if len(dims) > 1:
            raise ValueError(f"Sum 的子项维度不一致: {sorted(dims)}")
        return self

    @property
    def dim(self) -> int | None:
        for term in self.terms:
            if term.atom.dim is not None:
                return term.atom.dim
        return None

    def padded(self, d_new: int) -> "Sum":
        return Sum(terms=[SumTerm(weight=t.weight, atom=t.atom.padded(d_new)) for t in self.terms])


ConvexAtom = Annotated[
    Union[Affine, Quadratic, NormAffine, MaxAffine, Const, Sum],
    Field(discriminator="kind"),
]

SumTerm.model_rebuild()
Sum.model_rebuild()

ATOM_ADAPTER: TypeAdapter = TypeAdapter(ConvexAtom)
