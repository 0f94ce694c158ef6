from pydantic import Field

from app.core._settings.base_setting import BaseAppSettings


class MicpSettings(BaseAppSettings):
    time_limit: float = Field(default=120.0, ge=0, description="分支定界时间上限 (秒)")
    node_cap: int = Field(default=100000, ge=0, description="分支定界节点上限")
    delta_glob: float = Field(default=5e-7, ge=0, description="certify-or-improve 的充分下降阈值")
    certify_tol: float = Field(default=1e-9, ge=0, description="F̂* 与 F(x̂) 的相等判定容差")
    enumeration_threshold: int = Field(default=256, ge=1, description="退化因子不超过该值时直接枚举")
    enumerate_cap: int = Field(default=100000, ge=1, description="全局枚举的 selection 个数上限")
    integrality_tol: float = Field(default=1e-6, gt=0, description="二元变量整数性容差")
    max_restarts: int = Field(default=50, ge=0, description="certify 重启循环的最大次数")

    model_config = {
        **BaseAppSettings.model_config,
        "env_prefix": "MICP_",
    }
