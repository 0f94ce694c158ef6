from pydantic import Field

from app.core._settings.base_setting import BaseAppSettings


class LocalSettings(BaseAppSettings):
    delta: float = Field(default=1e-8, description="r-AM / DCA 停止阈值 δ")
    k_max: int = Field(default=400, ge=1, description="最大外层迭代次数 K_max")
    rho: float = Field(default=1e-12, ge=0, le=1, description="ρ-active 集合参数")
    epsilon_guard: float = Field(default=1e-14, gt=0, description="exploration ε 的分母保护")
    perturbation: float = Field(default=5e-7, ge=0, description="SM 候选的均匀扰动半宽")

    model_config = {
        **BaseAppSettings.model_config,
        "env_prefix": "LOCAL_",
    }
