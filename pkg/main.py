import sys

from app.api.cli import main
from app.utils.logger import cleanup_logging, setup_logging


# 初始化日志
setup_logging()


if __name__ == "__main__":
    try:
        code = main()
    finally:
        cleanup_logging()
    sys.exit(code)
