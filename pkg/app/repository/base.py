import json
from pathlib import Path
from typing import Any

import pandas as pd
from pydantic import BaseModel

from app.core.path_conf import BASE_DIR
from app.utils.logger import get_logger

# CSV 中浮点数的输出格式, 保证往返无损且逐字节可复现
FLOAT_FORMAT = "%.17g"


class BaseMapper:
    """
    基础Mapper类，提供 JSON / CSV 文件的读写
    """

    def __init__(self, root: Path | str | None = None):
        """
        Args:
            root: 相对路径的基准目录, 默认为项目根目录
        """
        self.root = Path(root) if root is not None else BASE_DIR
        self.logger = get_logger(self.__class__.__name__)

    def resolve(self, path: Path | str) -> Path:
        path = Path(path)
        return path if path.is_absolute() else self.root / path

    def read_json(self, path: Path | str) -> Any:
        with open(self.resolve(path), "r", encoding="utf-8") as fp:
            return json.load(fp)

    def write_json(self, path: Path | str, data: dict | BaseModel) -> Path:
        """
        写入 JSON, pydantic 对象按 JSON 模式导出 (非有限值为 null)

        Returns:
            写入的文件路径
        """
        target = self.resolve(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        text = data.model_dump_json(indent=2) if isinstance(data, BaseModel) else json.dumps(data, indent=2)
        target.write_text(text + "\n", encoding="utf-8")
        self.logger.debug(f"写入 {target}")
        return target

    def read_frame(self, path: Path | str) -> pd.DataFrame:
        return pd.read_csv(self.resolve(path))

    def write_frame(self, path: Path | str, frame: pd.DataFrame) -> Path:
        target = self.resolve(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(target, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        self.logger.debug(f"写入 {target} ({len(frame)} 行)")
        return target
