from pathlib import Path

import pandas as pd

from app.core.path_conf import DATASET_DIR
from app.handler.exception_handlers import ConfigException
from .base import BaseMapper


class DatasetMapper(BaseMapper):
    """
    数据集 CSV:
        PLR: 表头 + target 列 + 其余数值特征列
        RFL: lat, lng, population 三列
    """

    def __init__(self):
        super().__init__(DATASET_DIR)

    def _read(self, path: Path | str, required: set[str]) -> pd.DataFrame:
        frame = self.read_frame(path).dropna()
        missing = required - set(frame.columns)
        if missing:
            raise ConfigException(f"数据集 {path} 缺少列: {sorted(missing)}")
        if frame.empty:
            raise ConfigException(f"数据集 {path} 为空")
        self.logger.info(f"读取数据集 {path}: {len(frame)} 行")
        return frame.reset_index(drop=True)

    def read_plr(self, path: Path | str) -> pd.DataFrame:
        return self._read(path, {"target"})

    def read_rfl(self, path: Path | str) -> pd.DataFrame:
        frame = self._read(path, {"lat", "lng", "population"})
        return frame.astype({"lat": float, "lng": float, "population": float})


_dataset_mapper = DatasetMapper()

def get_dataset_mapper() -> DatasetMapper:
    return _dataset_mapper
