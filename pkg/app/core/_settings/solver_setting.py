from pydantic import Field

from app.core._settings.base_setting import BaseAppSettings


class SolverSettings(BaseAppSettings):
    tol_abs: float = Field(default=1e-9, gt=0, description="绝对容差")
    tol_rel: float = Field(default=1e-9, gt=0, description="相对容差")
    max_iters: int = Field(default=20000, ge=1, description="单纯形 / active-set / 牛顿法最大迭代次数")
    phase1_tol: float = Field(default=1e-8, gt=0, description="phase-1 可行性判定容差")
    subgradient_max_iters: int = Field(default=100000, ge=1, description="次梯度兜底方法迭代上限")
    barrier_gap: float = Field(default=1e-9, gt=0, description="内点法对偶间隙 m/t 的停止阈值")
    refactor_every: int = Field(default=50, ge=1, description="单纯形基矩阵逆的重新分解周期")
    bland_after: int = Field(default=30, ge=1, description="连续退化转轴多少次后切换为 Bland 规则")

    model_config = {
        **BaseAppSettings.model_config,
        "env_prefix": "SOLVER_",
    }
