from pathlib import Path
from typing import Literal, Dict
from pydantic import Field, computed_field
from app.core._settings.base_setting import BaseAppSettings
from app.core import path_conf


class LogSettings(BaseAppSettings):
    # --- 基础设置 ---
    level: str = Field(default="INFO")
    stack_trace_level: int = Field(default=8)
    handler: Literal["console", "file", "both"] = Field(default="console")
    file_name: str = Field(default="smc.log")
    file_max_size_mb: int = Field(default=10, description="日志文件最大大小 MB")
    file_backup_count: int = Field(default=5, description="保留的日志文件备份数量")

    @computed_field
    @property
    def file_path(self) -> Path:
        return path_conf.LOG_DIR / Path(self.file_name)
    # 是否在日志中记录异常的完整堆栈信息
    exceptions: bool = Field(default=True)
    format: str = Field(default="%(asctime)s - %(levelname)s - %(name)s:%(lineno)d - %(message)s")
    date_format: str = Field(default="%Y-%m-%d %H:%M:%S")

    # 允许覆盖特定模块的日志级别，例如 {"LpSolver": "WARNING"}
    # 通过环境变量传入 JSON 字符串
    override_loggers: Dict[str, str] = Field(default_factory=dict)

    model_config = {
        **BaseAppSettings.model_config,
        "env_prefix": "LOG_",  # 只读取 LOG_
    }
