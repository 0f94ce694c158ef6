"""
S-bounds: 每个 term 一个 n_s×n_s 的 big-M 矩阵

Forbidden 用 -∞ 表示 (JSON 中为 null), 对角线恒为 0。
"""
from typing import Annotated, Any

import numpy as np
from pydantic import BaseModel, BeforeValidator, PlainSerializer, field_validator

from app.model.common import ARRAY_CONFIG


def _bound_matrix(value: Any) -> np.ndarray:
    if isinstance(value, (list, tuple)):
        value = [[-np.inf if v is None else v for v in row] for row in value]
    arr = np.array(value, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"S-bound 矩阵必须是方阵, 实际形状 {arr.shape}")
    if np.isnan(arr).any() or np.isposinf(arr).any():
        raise ValueError("S-bound 矩阵不能包含 NaN 或 +∞")
    finite = np.isfinite(arr)
    if np.any(arr[finite] < 0):
        raise ValueError("S-bound 的有限项必须非负")
    np.fill_diagonal(arr, 0.0)
    arr.setflags(write=False)
    return arr


BoundMatrix = Annotated[np.ndarray, BeforeValidator(_bound_matrix), PlainSerializer(lambda a: a.tolist(), return_type=list)]


class SBounds(BaseModel):
    model_config = ARRAY_CONFIG

    M: list[BoundMatrix]

    @field_validator("M")
    @classmethod
    def _not_empty(cls, value: list[np.ndarray]) -> list[np.ndarray]:
        if not value:
            raise ValueError("SBounds 至少包含一个 term")
        return value

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(m.shape[0] for m in self.M)

    def forbidden(self, s: int) -> np.ndarray:
        return np.isneginf(self.M[s])

    def selectable(self, s: int) -> list[int]:
        """列 l 中没有 Forbidden 项时, 分量 l 才可被选中"""
        blocked = self.forbidden(s).any(axis=0)
        return [l for l in range(self.M[s].shape[0]) if not blocked[l]]
