import argparse
import json
from pathlib import Path
from typing import TypeVar

from pydantic import BaseModel

from app.handler.exception_handlers import ConfigException
from app.repository import get_instance_mapper
from app.utils.logger import get_logger

logger = get_logger(__name__)

ConfigType = TypeVar("ConfigType", bound=BaseModel)

# 命令行参数 → 配置字段
OVERRIDES = {"seed": "seed", "out": "output_dir", "time_limit": "time_limit"}


def add_common_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--config", type=str, default=None, help="JSON 配置文件")
    parser.add_argument("--instance", type=str, default=None, help="内置实例名 (kink / two_clip / saddle / valley)")
    parser.add_argument("--instance-file", type=str, default=None, help="JSON 实例文件")
    parser.add_argument("--seed", type=int, default=None, help="随机种子, 覆盖配置文件")
    parser.add_argument("--out", type=str, default=None, help="输出目录, 覆盖配置文件")
    parser.add_argument("--time-limit", type=float, default=None, help="分支定界时间上限 (秒)")


def load_config(model: type[ConfigType], args: argparse.Namespace, **extra) -> ConfigType:
    """
    读取 --config 指向的 JSON, 再用命令行参数覆盖

    Args:
        extra: 子命令特有的覆盖项, 值为 None 时忽略
    """
    data: dict = {}
    if args.config:
        data = get_instance_mapper().read_json(Path(args.config).resolve())
        if not isinstance(data, dict):
            raise ConfigException(f"配置文件 {args.config} 必须是 JSON 对象")
    if args.instance:
        data["instance"] = {"source": "builtin", "name": args.instance}
    elif args.instance_file:
        data["instance"] = {"source": "json", "path": str(Path(args.instance_file).resolve())}
    if "instance" not in data:
        raise ConfigException("需要 --config、--instance 或 --instance-file 之一")
    for arg, key in OVERRIDES.items():
        value = getattr(args, arg, None)
        if value is not None and key in model.model_fields:
            data[key] = value
    data.update({k: v for k, v in extra.items() if v is not None})
    config = model.model_validate(data)
    logger.debug(f"{model.__name__}: {json.dumps(config.model_dump(mode='json'), ensure_ascii=False)}")
    return config


def output_dir(config: BaseModel) -> Path:
    path = Path(config.output_dir).resolve()
    path.mkdir(parents=True, exist_ok=True)
    return path
