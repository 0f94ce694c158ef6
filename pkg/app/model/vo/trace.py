from pydantic import BaseModel, Field, field_serializer

from app.model.common import ARRAY_CONFIG, Vector
from app.model.field_enum import Termination

TRACE_SCHEMA_VERSION = 1


class IterRecord(BaseModel):
    """单次迭代记录"""
    model_config = ARRAY_CONFIG

    k: int
    x: Vector
    fbar: float = Field(description="F̄(x_k, Q_k)")
    f: float = Field(description="F(x_k)")
    gain: float
    epsilon_min: float = Field(default=0.0, description="min_s ε⁽ˢ⁾")
    decrease: float = Field(default=0.0, description="F̄(x_k, Q_k) - F̄(x_k, Q_{k+1})")
    c: float = Field(default=0.0, description="C_k")
    time_ms: float = 0.0


class RunTrace(BaseModel):
    model_config = ARRAY_CONFIG

    method: str
    start: int = 0
    seed: int | None = None
    records: list[IterRecord] = Field(default_factory=list)
    best_x: Vector | None = None
    best_value: float = float("inf")
    best_k: int | None = None
    termination: Termination = Termination.K_MAX
    message: str | None = None

    @property
    def iterations(self) -> int:
        return len(self.records)

    def to_rows(self) -> list[dict]:
        """CSV 行 (不含 x), 列顺序固定"""
        return [
            {"k": r.k, "Fbar": r.fbar, "F": r.f, "gain": r.gain, "epsilon_min": r.epsilon_min,
             "decrease": r.decrease, "C": r.c, "time_ms": r.time_ms}
            for r in self.records
        ]

    @field_serializer("best_value")
    def serialize_best_value(self, value: float) -> float | None:
        return value if value != float("inf") else None
