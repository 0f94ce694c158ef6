from typing import Sequence

import numpy as np
from pydantic import BaseModel, field_validator

from app.model.common import ARRAY_CONFIG, Vector

SIMPLEX_TOL = 1e-12


class Weights(BaseModel):
    """Q = (q⁽¹⁾, …, q⁽ᴺ⁾), 每个 q⁽ˢ⁾ 位于标准单纯形 Δ^{n_s}"""
    model_config = ARRAY_CONFIG

    q: list[Vector]

    @field_validator("q")
    @classmethod
    def _on_simplex(cls, value: list[np.ndarray]) -> list[np.ndarray]:
        if not value:
            raise ValueError("Weights 至少包含一个单纯形向量")
        for s, qs in enumerate(value):
            if qs.shape[0] < 1 or np.any(qs < 0) or abs(float(qs.sum()) - 1.0) > SIMPLEX_TOL:
                raise ValueError(f"第 {s} 个权重向量不在单纯形上: {qs.tolist()}")
        return value

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(qs.shape[0] for qs in self.q)

    @classmethod
    def vertex(cls, sigma: Sequence[int], sizes: Sequence[int]) -> "Weights":
        rows = []
        for index, n in zip(sigma, sizes):
            qs = np.zeros(n)
            qs[index] = 1.0
            rows.append(qs)
        return cls(q=rows)

    @classmethod
    def uniform(cls, sizes: Sequence[int]) -> "Weights":
        return cls(q=[np.full(n, 1.0 / n) for n in sizes])
