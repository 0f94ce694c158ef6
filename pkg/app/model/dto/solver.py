from pydantic import BaseModel, Field

from app.core import settings
from app.model.field_enum import SolveMethod


class SolverConfig(BaseModel):
    tol_abs: float = Field(default_factory=lambda: settings.solver.tol_abs, gt=0, description="绝对容差")
    tol_rel: float = Field(default_factory=lambda: settings.solver.tol_rel, gt=0, description="相对容差")
    max_iters: int = Field(default_factory=lambda: settings.solver.max_iters, ge=1, description="最大迭代次数")
    method: SolveMethod = Field(default=SolveMethod.AUTO, description="子问题求解方法")
    phase1_tol: float = Field(default_factory=lambda: settings.solver.phase1_tol, gt=0, description="phase-1 容差")
    subgradient_max_iters: int = Field(default_factory=lambda: settings.solver.subgradient_max_iters, ge=1)
    barrier_gap: float = Field(default_factory=lambda: settings.solver.barrier_gap, gt=0)
    refactor_every: int = Field(default_factory=lambda: settings.solver.refactor_every, ge=1)
    bland_after: int = Field(default_factory=lambda: settings.solver.bland_after, ge=1)
    lower_bound: float | None = Field(default=None, description="已知的目标下界, 次梯度法用作 Polyak 步长的目标值")


class Budget(BaseModel):
    time_limit: float = Field(default_factory=lambda: settings.micp.time_limit, ge=0, description="秒")
    node_cap: int = Field(default_factory=lambda: settings.micp.node_cap, ge=0, description="节点上限")
