import os

from pydantic_settings import BaseSettings


# --- 基础配置类 ---
class BaseAppSettings(BaseSettings):
    """
    求解器各子配置的基类, 共享 .env.{SMC_ENV} 文件; 各子类用 env_prefix 区分字段
    """
    model_config = {
        "env_file": f".env.{os.getenv('SMC_ENV', 'development')}",
        "env_file_encoding": "utf-8",
        "case_sensitive": False,
        "extra": "ignore",
    }
