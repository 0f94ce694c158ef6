"""
可行集 X: Box / NormBall / Halfspaces / Hyperplanes / EpigraphLink 的交集
"""
from typing import Any

import numpy as np
from pydantic import BaseModel, Field, model_validator

from app.model.common import ARRAY_CONFIG, Matrix, Vector
from app.model.entity.atoms import NormAffine, NormOrder
from app.model.field_enum import NormKind


class Box(BaseModel):
    """lo ≤ x ≤ hi, 分量可为 ±∞ (JSON 中写作 null)"""
    model_config = ARRAY_CONFIG

    lo: Vector
    hi: Vector

    @model_validator(mode="before")
    @classmethod
    def _none_as_infinite(cls, data: Any) -> Any:
        if isinstance(data, dict):
            data = dict(data)
            for key, fill in (("lo", -np.inf), ("hi", np.inf)):
                value = data.get(key)
                if isinstance(value, (list, tuple)):
                    data[key] = [fill if v is None else v for v in value]
        return data

    @model_validator(mode="after")
    def _check(self) -> "Box":
        if self.lo.shape != self.hi.shape:
            raise ValueError("lo 与 hi 长度不一致")
        if np.any(self.lo > self.hi):
            raise ValueError("Box 为空: 存在 lo > hi 的分量")
        return self

    @classmethod
    def uniform(cls, d: int, lo: float, hi: float) -> "Box":
        return cls(lo=np.full(d, lo), hi=np.full(d, hi))


class NormBall(BaseModel):
    """‖x_I - center‖_p ≤ radius, I 为坐标子集 (None 表示全部坐标)"""
    model_config = ARRAY_CONFIG

    p: NormOrder
    center: Vector
    radius: float = Field(ge=0)
    indices: list[int] | None = None

    @model_validator(mode="after")
    def _check(self) -> "NormBall":
        if self.indices is not None:
            if len(self.indices) != self.center.shape[0]:
                raise ValueError("indices 与 center 长度不一致")
            if len(set(self.indices)) != len(self.indices):
                raise ValueError("indices 中存在重复坐标")
        return self

    def coords(self, d: int) -> np.ndarray:
        return np.arange(d) if self.indices is None else np.asarray(self.indices, dtype=int)


class Halfspaces(BaseModel):
    """Gx ≤ g"""
    model_config = ARRAY_CONFIG

    G: Matrix
    g: Vector

    @model_validator(mode="after")
    def _check(self) -> "Halfspaces":
        if self.G.shape[0] != self.g.shape[0]:
            raise ValueError("G 的行数与 g 的长度不一致")
        return self


class Hyperplanes(BaseModel):
    """Ex = e"""
    model_config = ARRAY_CONFIG

    E: Matrix
    e: Vector

    @model_validator(mode="after")
    def _check(self) -> "Hyperplanes":
        if self.E.shape[0] != self.e.shape[0]:
            raise ValueError("E 的行数与 e 的长度不一致")
        return self


class EpigraphLink(BaseModel):
    """x[bound_index] ≥ atom(x), 例如 ‖x₀ - x_l‖₁ ≤ R"""
    model_config = ARRAY_CONFIG

    atom: NormAffine
    bound_index: int = Field(ge=0)


class FeasibleSet(BaseModel):
    model_config = ARRAY_CONFIG

    dim: int = Field(ge=1, description="决策变量维度 d")
    box: Box | None = None
    balls: list[NormBall] = Field(default_factory=list)
    halfspaces: list[Halfspaces] = Field(default_factory=list)
    hyperplanes: list[Hyperplanes] = Field(default_factory=list)
    links: list[EpigraphLink] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_dims(self) -> "FeasibleSet":
        d = self.dim
        if self.box is not None and self.box.lo.shape[0] != d:
            raise ValueError(f"box 维度 {self.box.lo.shape[0]} != {d}")
        for ball in self.balls:
            coords = ball.coords(d)
            if ball.center.shape[0] != coords.shape[0] or (coords.size and (coords.min() < 0 or coords.max() >= d)):
                raise ValueError("NormBall 的坐标子集越界或与 center 不一致")
        for hs in self.halfspaces:
            if hs.G.shape[1] != d:
                raise ValueError(f"Halfspaces 列数 {hs.G.shape[1]} != {d}")
        for hp in self.hyperplanes:
            if hp.E.shape[1] != d:
                raise ValueError(f"Hyperplanes 列数 {hp.E.shape[1]} != {d}")
        for link in self.links:
            if link.atom.dim != d or link.bound_index >= d:
                raise ValueError("EpigraphLink 维度不一致")
        return self

    @model_validator(mode="after")
    def _check_nonempty(self) -> "FeasibleSet":
        # 构造时做一次 phase-1 可行性求解, 空集直接抛 InfeasibleException
        from app.services.subsolve import find_feasible_point
        find_feasible_point(self)
        return self

    @classmethod
    def from_box(cls, lo, hi) -> "FeasibleSet":
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        return cls(dim=lo.shape[0], box=Box(lo=lo, hi=hi))

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        """由 box 与范数球推出的坐标区间 (不考虑 halfspaces / links)"""
        lo = np.full(self.dim, -np.inf)
        hi = np.full(self.dim, np.inf)
        if self.box is not None:
            lo, hi = np.maximum(lo, self.box.lo), np.minimum(hi, self.box.hi)
        for ball in self.balls:
            coords = ball.coords(self.dim)
            lo[coords] = np.maximum(lo[coords], ball.center - ball.radius)
            hi[coords] = np.minimum(hi[coords], ball.center + ball.radius)
        return lo, hi

    def is_bounded(self) -> bool:
        lo, hi = self.bounding_box()
        return bool(np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)))

    def diameter(self) -> float:
        """bounding box 的欧氏对角线长度, 作为直径上界"""
        lo, hi = self.bounding_box()
        return float(np.linalg.norm(hi - lo))

    def contains(self, x: np.ndarray, tol: float = 1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            return False
        if self.box is not None and (np.any(x < self.box.lo - tol) or np.any(x > self.box.hi + tol)):
            return False
        for ball in self.balls:
            diff = x[ball.coords(self.dim)] - ball.center
            order = {NormKind.L1: 1, NormKind.L2: 2, NormKind.LINF: np.inf}[ball.p]
            if np.linalg.norm(diff, ord=order) > ball.radius + tol:
                return False
        for hs in self.halfspaces:
            if np.any(hs.G @ x - hs.g > tol):
                return False
        for hp in self.hyperplanes:
            if np.any(np.abs(hp.E @ x - hp.e) > tol):
                return False
        for link in self.links:
            order = {NormKind.L1: 1, NormKind.L2: 2, NormKind.LINF: np.inf}[link.atom.p]
            value = link.atom.w * np.linalg.norm(link.atom.A @ x + link.atom.c, ord=order)
            if value > x[link.bound_index] + tol:
                return False
        return True

    def intersect(self, other: "FeasibleSet") -> "FeasibleSet":
        if other.dim != self.dim:
            raise ValueError(f"可行集维度不一致: {self.dim} vs {other.dim}")
        box = self.box
        if other.box is not None:
            box = other.box if box is None else Box(lo=np.maximum(box.lo, other.box.lo),
                                                     hi=np.minimum(box.hi, other.box.hi))
        return FeasibleSet(
            dim=self.dim,
            box=box,
            balls=[*self.balls, *other.balls],
            halfspaces=[*self.halfspaces, *other.halfspaces],
            hyperplanes=[*self.hyperplanes, *other.hyperplanes],
            links=[*self.links, *other.links],
        )

    def padded(self, d_new: int, extra_box: Box | None = None) -> "FeasibleSet":
        """追加 d_new - dim 个坐标, 新坐标的区间由 extra_box 给出 (默认无界)"""
        extra = d_new - self.dim
        lo = self.box.lo if self.box is not None else np.full(self.dim, -np.inf)
        hi = self.box.hi if self.box is not None else np.full(self.dim, np.inf)
        extra_lo = extra_box.lo if extra_box is not None else np.full(extra, -np.inf)
        extra_hi = extra_box.hi if extra_box is not None else np.full(extra, np.inf)
        return FeasibleSet(
            dim=d_new,
            box=Box(lo=np.concatenate([lo, extra_lo]), hi=np.concatenate([hi, extra_hi])),
            balls=[ball if ball.indices is not None else ball.model_copy(update={"indices": list(range(self.dim))})
                   for ball in self.balls],
            halfspaces=[Halfspaces(G=np.hstack([hs.G, np.zeros((hs.G.shape[0], extra))]), g=hs.g)
                        for hs in self.halfspaces],
            hyperplanes=[Hyperplanes(E=np.hstack([hp.E, np.zeros((hp.E.shape[0], extra))]), e=hp.e)
                         for hp in self.hyperplanes],
            links=[EpigraphLink(atom=link.atom.padded(d_new), bound_index=link.bound_index) for link in self.links],
        )
