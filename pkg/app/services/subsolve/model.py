"""
标准形模型与降阶 (lowering)

变量 z ∈ ℝⁿ, 前 n_x 个为原始决策变量 x, 其后为辅助变量:

    min   ½ z'Pz + c'z + c0
    s.t.  Gz ≤ h,  Az = b,  lb ≤ z ≤ ub
          ½ z'P_k z + q_k'z + r_k ≤ 0          (二次约束, 仅 conic 模式)
          ‖A_k z + c_k‖₂ ≤ f_k'z + g_k         (二阶锥, 仅 conic 模式)

辅助变量:
    MaxAffine (m > 1 行)   1 个上图变量 t, m 行 a_i'x + b_i - t ≤ 0
    ‖Ax + c‖₁             m 个变量 u ≥ 0, 2m 行 ±(A_i x + c_i) - u_i ≤ 0
    ‖Ax + c‖∞             1 个变量 t ≥ 0, 2m 行 ±(A_i x + c_i) - t ≤ 0
    ‖Ax + c‖₂             1 个变量 t ≥ 0, 1 个二阶锥
    ‖x_I - c‖₁ ≤ R        |I| 个变量 u ≥ 0, 2|I| + 1 行
"""
from dataclasses import dataclass, field, replace

import numpy as np

from app.handler.exception_handlers import UnsupportedAtomException
from app.model.entity.atoms import Affine, Const, ConvexAtom, MaxAffine, NormAffine, Quadratic, Sum
from app.model.entity.feasible import FeasibleSet
from app.model.field_enum import NormKind

DUMP_VERSION = 1


@dataclass
class QuadConstraint:
    P: np.ndarray
    q: np.ndarray
    r: float


@dataclass
class SocConstraint:
    A: np.ndarray
    c: np.ndarray
    f: np.ndarray
    g: float


@dataclass
class StandardModel:
    n_x: int
    P: np.ndarray
    c: np.ndarray
    c0: float
    G: np.ndarray
    h: np.ndarray
    A: np.ndarray
    b: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    quads: list[QuadConstraint] = field(default_factory=list)
    socs: list[SocConstraint] = field(default_factory=list)
    names: list[str] = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.c.shape[0]

    @property
    def is_qp(self) -> bool:
        return not self.quads and not self.socs

    @property
    def is_linear(self) -> bool:
        return self.is_qp and not np.any(self.P)

    def objective(self, z: np.ndarray) -> float:
        return float(0.5 * z @ (self.P @ z) + self.c @ z + self.c0)

    def with_bounds(self, lb: np.ndarray, ub: np.ndarray) -> "StandardModel":
        return replace(self, lb=np.asarray(lb, dtype=float), ub=np.asarray(ub, dtype=float))

    def max_violation(self, z: np.ndarray) -> float:
        parts = [0.0]
        if self.G.shape[0]:
            parts.append(float(np.max(self.G @ z - self.h)))
        if self.A.shape[0]:
            parts.append(float(np.max(np.abs(self.A @ z - self.b))))
        parts.append(float(np.max(self.lb - z, initial=0.0)))
        parts.append(float(np.max(z - self.ub, initial=0.0)))
        for qc in self.quads:
            parts.append(float(0.5 * z @ (qc.P @ z) + qc.q @ z + qc.r))
        for soc in self.socs:
            parts.append(float(np.linalg.norm(soc.A @ z + soc.c) - soc.f @ z - soc.g))
        return max(parts)

    def dump(self) -> str:
        """纯文本格式, 便于调试, 格式见 docs/schema.md"""
        lines = [f"# smc standard-form model v{DUMP_VERSION}", f"vars {self.n} {self.n_x}"]
        for j in range(self.n):
            name = self.names[j] if j < len(self.names) else f"z{j}"
            lines.append(f"var {j} {name} {self.lb[j]!r} {self.ub[j]!r}")
        lines.append(f"obj const {self.c0!r}")
        for j in np.flatnonzero(self.c):
            lines.append(f"obj lin {j} {self.c[j]!r}")
        for i, j in zip(*np.nonzero(self.P)):
            lines.append(f"obj quad {i} {j} {self.P[i, j]!r}")
        for kind, M, rhs in (("le", self.G, self.h), ("eq", self.A, self.b)):
            for i in range(M.shape[0]):
                coefs = " ".join(f"{j}:{M[i, j]!r}" for j in np.flatnonzero(M[i]))
                lines.append(f"{kind} {i} {coefs} rhs {rhs[i]!r}")
        for k, qc in enumerate(self.quads):
            lines.append(f"qc {k} r {qc.r!r}")
            for j in np.flatnonzero(qc.q):
                lines.append(f"qc {k} lin {j} {qc.q[j]!r}")
            for i, j in zip(*np.nonzero(qc.P)):
                lines.append(f"qc {k} quad {i} {j} {qc.P[i, j]!r}")
        for k, soc in enumerate(self.socs):
            lines.append(f"soc {k} rows {soc.A.shape[0]} g {soc.g!r}")
            for i, j in zip(*np.nonzero(soc.A)):
                lines.append(f"soc {k} A {i} {j} {soc.A[i, j]!r}")
            for i in np.flatnonzero(soc.c):
                lines.append(f"soc {k} c {i} {soc.c[i]!r}")
            for j in np.flatnonzero(soc.f):
                lines.append(f"soc {k} f {j} {soc.f[j]!r}")
        return "\n".join(lines) + "\n"


@dataclass
class Expr:
    """线性表达式 Σ coef_j z_j + const, quad 为作用在 x 上的 ½x'Qx"""
    coef: dict[int, float] = field(default_factory=dict)
    const: float = 0.0
    quad: np.ndarray | None = None

    def __add__(self, other: "Expr") -> "Expr":
        coef = dict(self.coef)
        for j, v in other.coef.items():
            coef[j] = coef.get(j, 0.0) + v
        if self.quad is None:
            quad = other.quad
        elif other.quad is None:
            quad = self.quad
        else:
            quad = self.quad + other.quad
        return Expr(coef, self.const + other.const, quad)

    def scaled(self, w: float) -> "Expr":
        return Expr({j: w * v for j, v in self.coef.items()}, w * self.const,
                    None if self.quad is None else w * self.quad)

    @classmethod
    def affine(cls, a: np.ndarray, b: float = 0.0, offset: int = 0) -> "Expr":
        return cls({offset + int(j): float(a[j]) for j in np.flatnonzero(a)}, float(b))

    @classmethod
    def var(cls, j: int, coef: float = 1.0) -> "Expr":
        return cls({j: coef})


class ModelBuilder:
    """把原子函数与可行集降阶为 StandardModel"""

    def __init__(self, d: int, allow_conic: bool = False):
        self.n_x = d
        self.allow_conic = allow_conic
        self.lb: list[float] = [-np.inf] * d
        self.ub: list[float] = [np.inf] * d
        self.names: list[str] = [f"x{i}" for i in range(d)]
        self.le_rows: list[Expr] = []
        self.eq_rows: list[Expr] = []
        self.quad_rows: list[Expr] = []
        self.soc_rows: list[tuple[list[Expr], Expr]] = []
        self.obj = Expr()

    @property
    def n(self) -> int:
        return len(self.lb)

    def add_var(self, name: str, lb: float = -np.inf, ub: float = np.inf) -> int:
        self.lb.append(lb)
        self.ub.append(ub)
        self.names.append(name)
        return self.n - 1

    def tighten(self, j: int, lb: float = -np.inf, ub: float = np.inf):
        self.lb[j] = max(self.lb[j], lb)
        self.ub[j] = min(self.ub[j], ub)

    def add_le(self, expr: Expr):
        """expr ≤ 0"""
        if expr.quad is not None and np.any(expr.quad):
            if not self.allow_conic:
                raise UnsupportedAtomException("二次函数出现在约束中, 需要内点法")
            self.quad_rows.append(expr)
        else:
            self.le_rows.append(Expr(expr.coef, expr.const))

    def add_eq(self, expr: Expr):
        self.eq_rows.append(expr)

    def lift(self, atom: ConvexAtom, tag: str = "a") -> Expr:
        """返回表达式 e, 使得 atom(x) = min{e(z) : 新增约束}"""
        match atom:
            case Affine():
                return Expr.affine(atom.a, atom.b)
            case Const():
                return Expr(const=atom.value)
            case Quadratic():
                expr = Expr.affine(atom.a, atom.b)
                expr.quad = np.array(atom.P, dtype=float)
                return expr
            case MaxAffine():
                if atom.A.shape[0] == 1:
                    return Expr.affine(atom.A[0], atom.b[0])
                t = self.add_var(f"{tag}_t")
                for a_i, b_i in zip(atom.A, atom.b):
                    self.add_le(Expr.affine(a_i, b_i) + Expr.var(t, -1.0))
                return Expr.var(t)
            case NormAffine():
                return self._lift_norm(atom, tag)
            case Sum():
                expr = Expr()
                for k, term in enumerate(atom.terms):
                    if term.weight > 0:
                        expr = expr + self.lift(term.atom, f"{tag}.{k}").scaled(term.weight)
                return expr
        raise TypeError(f"未知的原子类型: {type(atom).__name__}")

    def _lift_norm(self, atom: NormAffine, tag: str) -> Expr:
        rows = [Expr.affine(a_i, c_i) for a_i, c_i in zip(atom.A, atom.c)]
        if atom.p == NormKind.L1:
            expr = Expr()
            for i, row in enumerate(rows):
                u = self.add_var(f"{tag}_u{i}", lb=0.0)
                self.add_le(row + Expr.var(u, -1.0))
                self.add_le(row.scaled(-1.0) + Expr.var(u, -1.0))
                expr = expr + Expr.var(u, atom.w)
            return expr
        if atom.p == NormKind.LINF:
            t = self.add_var(f"{tag}_t", lb=0.0)
            for row in rows:
                self.add_le(row + Expr.var(t, -1.0))
                self.add_le(row.scaled(-1.0) + Expr.var(t, -1.0))
            return Expr.var(t, atom.w)
        if not self.allow_conic:
            raise UnsupportedAtomException("‖·‖₂ 原子无法降阶为 LP/QP")
        t = self.add_var(f"{tag}_t", lb=0.0)
        self.soc_rows.append((rows, Expr.var(t)))
        return Expr.var(t, atom.w)

    def add_objective(self, objective: list[tuple[float, ConvexAtom]]):
        for k, (weight, atom) in enumerate(objective):
            if weight > 0:
                self.obj = self.obj + self.lift(atom, f"f{k}").scaled(weight)

    def add_feasible_set(self, X: FeasibleSet):
        if X.dim != self.n_x:
            raise ValueError(f"可行集维度 {X.dim} != {self.n_x}")
        if X.box is not None:
            for j in range(X.dim):
                self.tighten(j, float(X.box.lo[j]), float(X.box.hi[j]))
        for k, ball in enumerate(X.balls):
            coords = ball.coords(X.dim)
            if ball.p == NormKind.LINF:
                for j, center in zip(coords, ball.center):
                    self.tighten(int(j), center - ball.radius, center + ball.radius)
            elif ball.p == NormKind.L1:
                total = Expr(const=-ball.radius)
                for j, center in zip(coords, ball.center):
                    u = self.add_var(f"ball{k}_u{j}", lb=0.0)
                    diff = Expr({int(j): 1.0}, -float(center))
                    self.add_le(diff + Expr.var(u, -1.0))
                    self.add_le(diff.scaled(-1.0) + Expr.var(u, -1.0))
                    total = total + Expr.var(u)
                self.add_le(total)
            else:
                if not self.allow_conic:
                    raise UnsupportedAtomException("‖·‖₂ 球约束无法降阶为 LP/QP")
                # ‖x_I - c‖² - R² ≤ 0
                Q = np.zeros((X.dim, X.dim))
                Q[coords, coords] = 2.0
                q = np.zeros(X.dim)
                q[coords] = -2.0 * ball.center
                expr = Expr.affine(q, float(ball.center @ ball.center - ball.radius ** 2))
                expr.quad = Q
                self.add_le(expr)
        for hs in X.halfspaces:
            for g_i, rhs in zip(hs.G, hs.g):
                self.add_le(Expr.affine(g_i, -rhs))
        for hp in X.hyperplanes:
            for e_i, rhs in zip(hp.E, hp.e):
                self.add_eq(Expr.affine(e_i, -rhs))
        for k, link in enumerate(X.links):
            self.add_le(self.lift(link.atom, f"link{k}") + Expr.var(link.bound_index, -1.0))

    def _dense(self, rows: list[Expr]) -> tuple[np.ndarray, np.ndarray]:
        M = np.zeros((len(rows), self.n))
        rhs = np.zeros(len(rows))
        for i, row in enumerate(rows):
            for j, v in row.coef.items():
                M[i, j] += v
            rhs[i] = -row.const
        return M, rhs

    def _pad_quad(self, quad: np.ndarray | None) -> np.ndarray:
        P = np.zeros((self.n, self.n))
        if quad is not None:
            P[:self.n_x, :self.n_x] = quad
        return P

    def build(self) -> StandardModel:
        G, h = self._dense(self.le_rows)
        A, b = self._dense(self.eq_rows)
        c = np.zeros(self.n)
        for j, v in self.obj.coef.items():
            c[j] += v
        quads = []
        for row in self.quad_rows:
            q = np.zeros(self.n)
            for j, v in row.coef.items():
                q[j] += v
            quads.append(QuadConstraint(self._pad_quad(row.quad), q, row.const))
        socs = []
        for rows, bound in self.soc_rows:
            S, s_rhs = self._dense(rows)
            f = np.zeros(self.n)
            for j, v in bound.coef.items():
                f[j] += v
            socs.append(SocConstraint(S, -s_rhs, f, bound.const))
        return StandardModel(
            n_x=self.n_x,
            P=self._pad_quad(self.obj.quad),
            c=c,
            c0=self.obj.const,
            G=G, h=h, A=A, b=b,
            lb=np.array(self.lb, dtype=float),
            ub=np.array(self.ub, dtype=float),
            quads=quads,
            socs=socs,
            names=list(self.names),
        )


def lower(objective: list[tuple[float, ConvexAtom]], X: FeasibleSet, allow_conic: bool = False) -> StandardModel:
    builder = ModelBuilder(X.dim, allow_conic=allow_conic)
    builder.add_feasible_set(X)
    builder.add_objective(objective)
    return builder.build()
