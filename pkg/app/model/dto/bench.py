from typing import Any, Literal

from pydantic import BaseModel, Field, model_validator

from app.core import settings
from app.model.dto.schedule import Schedule
from app.model.dto.solver import SolverConfig
from app.model.field_enum import InstanceSource, MethodName


class InstanceSpec(BaseModel):
    source: InstanceSource = Field(default=InstanceSource.BUILTIN, description="实例来源")
    name: str | None = Field(default=None, description="内置实例名")
    path: str | None = Field(default=None, description="JSON 实例或数据集 CSV 路径")
    params: dict[str, Any] = Field(default_factory=dict, description="构造器参数")

    @model_validator(mode="after")
    def _check(self) -> "InstanceSpec":
        if self.source == InstanceSource.BUILTIN and not self.name:
            raise ValueError("内置实例需要 name")
        if self.source == InstanceSource.JSON and not self.path:
            raise ValueError("JSON 实例需要 path")
        return self


class MethodSpec(BaseModel):
    name: MethodName
    schedule: Schedule | None = Field(default=None, description="为空时使用该方法的默认计划")

    def resolved_schedule(self) -> Schedule:
        return self.schedule or Schedule.preset(self.name)


class BenchConfig(BaseModel):
    version: Literal[1] = 1
    instance: InstanceSpec
    methods: list[MethodSpec] = Field(min_length=1)
    starts: int = Field(default_factory=lambda: settings.bench.starts, ge=1)
    seed: int = Field(default_factory=lambda: settings.bench.seed, ge=0)
    delta: float = Field(default_factory=lambda: settings.local.delta)
    k_max: int = Field(default_factory=lambda: settings.local.k_max, ge=1)
    workers: int = Field(default_factory=lambda: settings.bench.workers, ge=1)
    output_dir: str = Field(default_factory=lambda: settings.bench.output_dir)
    enumeration_cap: int = Field(default=1000, ge=0, description="selection 数不超过该值时附带枚举最优值")
    solver: SolverConfig = Field(default_factory=SolverConfig)


class NeighbourhoodSpec(BaseModel):
    """局部邻域 𝒮: box 型为 [x̂ - below, x̂ + above], plr / rfl 型使用闭式 S-bounds"""
    kind: Literal["box", "plr", "rfl"] = "box"
    below: float = Field(default=0.1, ge=0)
    above: float = Field(default=0.1, ge=0)
    radius: float = Field(default=0.1, gt=0, description="plr 的 R 或 rfl 的 R∞")


class CertifyConfig(BaseModel):
    version: Literal[1] = 1
    instance: InstanceSpec
    x_hat: list[float] | None = Field(default=None, description="候选点; 为空时先跑一次局部搜索")
    method: MethodSpec = Field(default_factory=lambda: MethodSpec(name=MethodName.AM))
    neighbourhood: NeighbourhoodSpec = Field(default_factory=NeighbourhoodSpec)
    rho: float = Field(default_factory=lambda: settings.local.rho, ge=0, le=1)
    delta_glob: float = Field(default_factory=lambda: settings.micp.delta_glob, ge=0)
    time_limit: float = Field(default_factory=lambda: settings.micp.time_limit, ge=0)
    node_cap: int = Field(default_factory=lambda: settings.micp.node_cap, ge=0)
    restart: bool = Field(default=True, description="Improved 后是否重启局部搜索")
    max_restarts: int = Field(default_factory=lambda: settings.micp.max_restarts, ge=0)
    seed: int = Field(default_factory=lambda: settings.bench.seed, ge=0)
    delta: float = Field(default_factory=lambda: settings.local.delta)
    k_max: int = Field(default_factory=lambda: settings.local.k_max, ge=1)
    output_dir: str = Field(default_factory=lambda: settings.bench.output_dir)
    solver: SolverConfig = Field(default_factory=SolverConfig)


class ScanConfig(BaseModel):
    version: Literal[1] = 1
    instance: InstanceSpec
    c_grid: list[float] = Field(default_factory=lambda: [0.0, 0.25, 0.5, 0.75, 1.0])
    lo: list[float] | None = Field(default=None, description="网格下界, 默认取可行集的 bounding box")
    hi: list[float] | None = Field(default=None)
    num: int = Field(default=101, ge=2, description="每一维的网格点数")
    bounds: str | None = Field(default=None, description="S-bounds JSON 路径, 为空时自动计算")
    output_dir: str = Field(default_factory=lambda: settings.bench.output_dir)
    solver: SolverConfig = Field(default_factory=SolverConfig)

    @model_validator(mode="after")
    def _check(self) -> "ScanConfig":
        if any(c < 0 or c > 1 for c in self.c_grid):
            raise ValueError("C 必须位于 [0, 1]")
        return self


class EnumerateConfig(BaseModel):
    version: Literal[1] = 1
    instance: InstanceSpec
    cap: int = Field(default_factory=lambda: settings.micp.enumerate_cap, ge=1)
    workers: int = Field(default_factory=lambda: settings.bench.workers, ge=1)
    micp: bool = Field(default=False, description="同时用全局 big-M 模型求解并对比")
    time_limit: float = Field(default_factory=lambda: settings.micp.time_limit, ge=0)
    node_cap: int = Field(default_factory=lambda: settings.micp.node_cap, ge=0)
    output_dir: str = Field(default_factory=lambda: settings.bench.output_dir)
    solver: SolverConfig = Field(default_factory=SolverConfig)


class BoundsConfig(BaseModel):
    version: Literal[1] = 1
    instance: InstanceSpec
    output_dir: str = Field(default_factory=lambda: settings.bench.output_dir)
    solver: SolverConfig = Field(default_factory=SolverConfig)
