from typing import Annotated, Any, Generic, Optional, TypeVar

import numpy as np
from pydantic import BaseModel, BeforeValidator, PlainSerializer
from app.core import SolveCode, SolveMsg

T = TypeVar('T')


def _frozen_array(value: Any, ndim: int) -> np.ndarray:
    arr = np.array(value, dtype=float)
    if arr.ndim == 1 and ndim == 2 and arr.size == 0:
        arr = arr.reshape(0, 0)
    if arr.ndim == 0 and ndim == 1:
        arr = arr.reshape(1)
    if arr.ndim != ndim:
        raise ValueError(f"期望 {ndim} 维数组, 实际为 {arr.ndim} 维")
    if np.isnan(arr).any():
        raise ValueError("数组中包含 NaN")
    arr.setflags(write=False)
    return arr


def _to_list(arr: np.ndarray) -> list:
    return arr.tolist()


# 不可变 numpy 数组; JSON 中为 (嵌套) 列表, 非有限值序列化为 null
Vector = Annotated[np.ndarray, BeforeValidator(lambda v: _frozen_array(v, 1)), PlainSerializer(_to_list, return_type=list)]
Matrix = Annotated[np.ndarray, BeforeValidator(lambda v: _frozen_array(v, 2)), PlainSerializer(_to_list, return_type=list)]

ARRAY_CONFIG = {"frozen": True, "arbitrary_types_allowed": True}


class Result(BaseModel, Generic[T]):
    code: int
    msg: str
    data: Optional[T] = None

    @classmethod
    def success(cls, data: Optional[T] = None, msg: str = SolveMsg.SUCCESS, code: int = SolveCode.SUCCESS) -> "Result[T]":
        return cls(code=code, msg=msg, data=data)

    @classmethod
    def failure(cls, msg: str = SolveMsg.ERROR, code: int = SolveCode.ERROR, data: Optional[T] = None) -> "Result[T]":
        return cls(code=code, msg=msg, data=data)
