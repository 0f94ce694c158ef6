import functools
from typing import Callable

import numpy as np
from pydantic import ValidationError

from app.utils.logger import get_logger
from app.core import SolveCode, SolveMsg

logger = get_logger(__name__)


class SmcException(Exception):
    def __init__(self, msg: str, code: int = SolveCode.ERROR, exit_code: int = 1):
        self.msg = msg
        self.code = code
        self.exit_code = exit_code
        super().__init__(self.msg)


class InfeasibleException(SmcException):
    def __init__(self, msg: str = SolveMsg.INFEASIBLE):
        super().__init__(msg, SolveCode.INFEASIBLE)


class UnboundedException(SmcException):
    def __init__(self, msg: str = SolveMsg.UNBOUNDED):
        super().__init__(msg, SolveCode.UNBOUNDED)


class IterationLimitException(SmcException):
    """迭代上限; 携带目前为止的最好点 (可能为 None)"""
    def __init__(self, msg: str = SolveMsg.ITERATION_LIMIT, x: np.ndarray | None = None,
                 value: float | None = None):
        super().__init__(msg, SolveCode.ITERATION_LIMIT)
        self.x = x
        self.value = value


class UnsupportedAtomException(SmcException):
    def __init__(self, msg: str = SolveMsg.UNSUPPORTED_ATOM):
        super().__init__(msg, SolveCode.UNSUPPORTED_ATOM)


class CapExceededException(SmcException):
    def __init__(self, msg: str = SolveMsg.CAP_EXCEEDED):
        super().__init__(msg, SolveCode.CAP_EXCEEDED)


class BadDimsException(SmcException):
    def __init__(self, msg: str = SolveMsg.BAD_DIMS):
        super().__init__(msg, SolveCode.BAD_DIMS, exit_code=2)


class DimensionMismatchException(SmcException):
    def __init__(self, msg: str = SolveMsg.DIMENSION_MISMATCH):
        super().__init__(msg, SolveCode.DIMENSION_MISMATCH, exit_code=2)


class ShapeMismatchException(SmcException):
    def __init__(self, msg: str = SolveMsg.SHAPE_MISMATCH):
        super().__init__(msg, SolveCode.SHAPE_MISMATCH, exit_code=2)


class MissingBoundsException(SmcException):
    def __init__(self, msg: str = SolveMsg.MISSING_BOUNDS):
        super().__init__(msg, SolveCode.MISSING_BOUNDS, exit_code=2)


class ConfigException(SmcException):
    def __init__(self, msg: str = SolveMsg.CONFIG_ERROR):
        super().__init__(msg, SolveCode.CONFIG_ERROR, exit_code=2)


def cli_exception_handler(func: Callable[..., int]) -> Callable[..., int]:
    """命令行入口的全局异常处理: 记录日志并转换为进程退出码"""

    @functools.wraps(func)
    def wrapper(*args, **kwargs) -> int:
        try:
            return func(*args, **kwargs)
        except SmcException as exc:
            logger.error(f"{exc.__class__.__name__}[{exc.code}]: {exc.msg}")
            return exc.exit_code
        except ValidationError as exc:
            logger.error(f"Pydantic ValidationError: {exc.errors(include_url=False)}")
            return SolveCode.VALIDATION_ERROR
        except OSError as exc:
            logger.error(f"{SolveMsg.IO_ERROR}: {exc}")
            return SolveCode.IO_ERROR
        except Exception as exc:
            logger.error(f"Global Exception: {str(exc)}", exc_info=True)
            return SolveCode.ERROR

    return wrapper
