from pathlib import Path

BASE_DIR: Path = Path(__file__).resolve().parent.parent.parent

RESOURCE_DIR: Path = BASE_DIR / "resources"

DATASET_DIR: Path = RESOURCE_DIR / "datasets"

CONFIG_DIR: Path = RESOURCE_DIR / "configs"

LOG_DIR: Path = BASE_DIR / "logs"
