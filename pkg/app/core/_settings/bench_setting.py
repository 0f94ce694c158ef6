from pydantic import Field

from app.core._settings.base_setting import BaseAppSettings


class BenchSettings(BaseAppSettings):
    starts: int = Field(default=50, ge=1, description="每个方法的多起点次数")
    seed: int = Field(default=0, ge=0, description="随机种子")
    workers: int = Field(default=1, ge=1, description="并发 worker 数")
    output_dir: str = Field(default="output", description="结果输出目录")

    model_config = {
        **BaseAppSettings.model_config,
        "env_prefix": "BENCH_",
    }
