from pydantic import BaseModel, Field

from app.model.common import ARRAY_CONFIG, Vector
from app.model.field_enum import CertifyStatus, CriticalityStatus, LocalStrategy, MicpStatus


class CriticalityVerdict(BaseModel):
    status: CriticalityStatus
    gain: float


class EnumerationResult(BaseModel):
    model_config = ARRAY_CONFIG

    value: float = Field(description="F*")
    x: Vector
    sigma: tuple[int, ...]
    optimal_selections: list[tuple[int, ...]] = Field(default_factory=list, description="达到 F* 的全部 σ")
    pieces: int = 0


class NodeRecord(BaseModel):
    node_id: int
    key: tuple[int, ...]
    parent: int | None
    bound: float | None
    status: str


class MicpResult(BaseModel):
    model_config = ARRAY_CONFIG

    status: MicpStatus
    value: float | None = None
    x: Vector | None = None
    selection: tuple[int, ...] | None = None
    nodes: int = 0
    node_log: list[NodeRecord] = Field(default_factory=list)


class ModelStats(BaseModel):
    binaries: int
    rows: int
    continuous: int


class CertifyVerdict(BaseModel):
    model_config = ARRAY_CONFIG

    status: CertifyStatus
    x_hat: Vector
    value_hat: float = Field(description="F(x̂)")
    x: Vector | None = Field(default=None, description="局部问题的最优点 / 改进点")
    value: float | None = Field(default=None, description="F(x)")
    local_value: float | None = Field(default=None, description="F̂*_{x̂,𝒮}")
    degeneracy_factor: int = 1
    binaries: int = 0
    strategy: LocalStrategy | None = None
    nodes: int = 0


class RestartReport(BaseModel):
    model_config = ARRAY_CONFIG

    initial_value: float
    final_value: float
    final_x: Vector
    restarts: int
    enhancement_pct: float = Field(description="value enhancement 百分比")
    verdicts: list[CertifyVerdict] = Field(default_factory=list)
