import itertools

import numpy as np
import pytest

from app.handler.exception_handlers import InfeasibleException, IterationLimitException, UnboundedException
from app.model.dto.solver import SolverConfig
from app.model.entity.atoms import Affine, MaxAffine, NormAffine, Quadratic
from app.model.entity.feasible import Box, FeasibleSet, Halfspaces, Hyperplanes, NormBall
from app.model.entity.problem import WeightedSubproblem
from app.model.entity.weights import Weights
from app.model.field_enum import NormKind, SolveMethod
from app.services.funcs import weighted_value
from app.services.subsolve import (
    BarrierSolver,
    ConvexSolver,
    ModelSolution,
    ReferenceBackend,
    find_feasible_point,
    lower,
    minimize_quadratic_on_ball,
    project,
)


def test_lp_on_box():
    X = FeasibleSet.from_box([-1.0, -2.0], [3.0, 4.0])
    x, value = ConvexSolver().solve_objective([(1.0, Affine(a=[1.0, -1.0], b=0.5))], X)
    assert np.allclose(x, [-1.0, 4.0], atol=1e-9)
    assert value == pytest.approx(-4.5)


def test_lp_with_halfspaces_and_hyperplanes():
    X = FeasibleSet(
        dim=2,
        box=Box.uniform(2, 0.0, 10.0),
        halfspaces=[Halfspaces(G=[[1.0, 1.0]], g=[4.0])],
        hyperplanes=[Hyperplanes(E=[[1.0, -1.0]], e=[1.0])],
    )
    x, value = ConvexSolver().solve_objective([(1.0, Affine(a=[-1.0, -1.0]))], X)
    assert np.allclose(x, [2.5, 1.5], atol=1e-8)
    assert value == pytest.approx(-4.0)


def test_max_affine_and_l1_lowering():
    X = FeasibleSet.from_box([-5.0], [5.0])
    objective = [(1.0, MaxAffine(A=[[1.0], [-1.0]], b=[-1.0, 1.0])),
                 (0.5, NormAffine(p=NormKind.L1, A=[[1.0]], c=[-1.0]))]
    x, value = ConvexSolver().solve_objective(objective, X)
    assert x[0] == pytest.approx(1.0, abs=1e-8)
    assert value == pytest.approx(0.0, abs=1e-9)


def test_qp_active_set():
    X = FeasibleSet.from_box([-1.0, -1.0], [1.0, 1.0])
    atom = Quadratic(P=np.eye(2) * 2.0, a=[-4.0, 0.0], b=0.0)
    x, value = ConvexSolver().solve_objective([(1.0, atom)], X)
    assert np.allclose(x, [1.0, 0.0], atol=1e-9)
    assert value == pytest.approx(-3.0)


def test_l2_norm_uses_barrier():
    X = FeasibleSet.from_box([-3.0, -3.0], [3.0, 3.0])
    atom = NormAffine(p=NormKind.L2, A=np.eye(2), c=[-1.0, -2.0])
    x, value = ConvexSolver().solve_objective([(1.0, atom), (1.0, Affine(a=[0.1, 0.0]))], X)
    assert np.allclose(x, [1.0, 2.0], atol=1e-5)
    assert value == pytest.approx(0.1, abs=1e-6)


def test_euclidean_ball_constraint():
    X = FeasibleSet(dim=2, balls=[NormBall(p=NormKind.L2, center=[0.0, 0.0], radius=1.0)])
    x, value = ConvexSolver().solve_objective([(1.0, Affine(a=[1.0, 1.0]))], X)
    assert np.allclose(x, [-np.sqrt(0.5), -np.sqrt(0.5)], atol=1e-6)
    assert value == pytest.approx(-np.sqrt(2.0), abs=1e-6)


def test_weighted_subproblem_matches_piece(kink):
    weights = Weights.vertex((2,), kink.sizes)
    x, value = ConvexSolver().solve_convex(WeightedSubproblem(problem=kink, weights=weights))
    assert x[0] == pytest.approx(-2.0, abs=1e-9)
    assert value == pytest.approx(-33 / 16)


def test_infeasible_set_is_rejected():
    with pytest.raises(InfeasibleException):
        FeasibleSet(dim=1, box=Box.uniform(1, 0.0, 1.0), halfspaces=[Halfspaces(G=[[1.0]], g=[-1.0])])


def test_unbounded_lp():
    X = FeasibleSet(dim=1, halfspaces=[Halfspaces(G=[[1.0]], g=[0.0])])
    with pytest.raises(UnboundedException):
        ConvexSolver().solve_objective([(1.0, Affine(a=[1.0]))], X)


def test_feasible_point_is_inside():
    X = FeasibleSet(dim=2, box=Box.uniform(2, -1.0, 1.0), halfspaces=[Halfspaces(G=[[1.0, 1.0]], g=[-1.5])])
    z = find_feasible_point(X)
    assert X.contains(z, tol=1e-7)


def test_subgradient_method_agrees_with_lp():
    X = FeasibleSet.from_box([-2.0], [2.0])
    objective = [(1.0, NormAffine(p=NormKind.L1, A=[[1.0]], c=[-0.5]))]
    x, value = ConvexSolver(SolverConfig(method=SolveMethod.SUBGRADIENT, lower_bound=0.0)).solve_objective(objective, X)
    assert value == pytest.approx(0.0, abs=1e-6)
    assert x[0] == pytest.approx(0.5, abs=1e-6)


def test_project_onto_box_and_halfspace():
    X = FeasibleSet(dim=2, box=Box.uniform(2, 0.0, 1.0), halfspaces=[Halfspaces(G=[[1.0, 1.0]], g=[1.0])])
    y = project(X, np.array([1.0, 1.0]))
    assert np.allclose(y, [0.5, 0.5], atol=1e-6)


def test_trust_region_helper():
    u, value = minimize_quadratic_on_ball(np.zeros((1, 1)), np.array([-1.0]), 2.0)
    assert u[0] == pytest.approx(2.0, rel=1e-9)
    assert value == pytest.approx(-2.0, rel=1e-9)
    u, value = minimize_quadratic_on_ball(np.eye(1) * 2.0, np.array([-1.0]), 5.0)
    assert u[0] == pytest.approx(0.5)
    assert value == pytest.approx(-0.25)


def test_model_dump_is_plain_text():
    X = FeasibleSet.from_box([-1.0], [1.0])
    text = lower([(1.0, MaxAffine(A=[[1.0], [-1.0]], b=[0.0, 0.0]))], X).dump()
    assert text.startswith("# smc standard-form model v1")
    assert "le 0" in text and "obj lin" in text


def test_barrier_keeps_epigraph_variables_bounded():
    X = FeasibleSet.from_box([-3.0, -3.0], [3.0, 3.0])
    objective = [(1.0, NormAffine(p=NormKind.L2, A=np.eye(2), c=[-1.0, -2.0])), (1.0, Affine(a=[0.1, 0.0]))]
    model = lower(objective, X, allow_conic=True)
    start = BarrierSolver().feasible_point(model, strict=True)
    assert np.isfinite(start).all()
    assert model.max_violation(start) < 0
    solution = BarrierSolver().solve(model)
    assert np.allclose(solution.z[:2], [1.0, 2.0], atol=1e-5)
    assert solution.value == pytest.approx(0.1, abs=1e-6)


def test_barrier_with_quadratic_objective_and_cone():
    X = FeasibleSet.from_box([-5.0, -5.0], [5.0, 5.0])
    objective = [(1.0, NormAffine(p=NormKind.L2, A=np.eye(2), c=[-2.0, 0.0])),
                 (1.0, Quadratic(P=np.eye(2), a=[0.0, 0.0], b=0.0))]
    x, value = ConvexSolver().solve_objective(objective, X)
    assert np.allclose(x, [1.0, 0.0], atol=1e-5)
    assert value == pytest.approx(1.5, abs=1e-6)


def _polytope(rng, d: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    """包含原点的有界多面体 {x : Gx ≤ g}, 没有 box, 降阶后 x 为自由变量"""
    G = rng.normal(size=(m, d))
    G /= np.linalg.norm(G, axis=1, keepdims=True)
    G = np.vstack([G, np.eye(d), -np.eye(d)])
    g = rng.uniform(0.5, 2.0, size=G.shape[0])
    return G, g


def _vertex_minimum(G: np.ndarray, g: np.ndarray, c: np.ndarray) -> float:
    d = G.shape[1]
    best = np.inf
    for rows in itertools.combinations(range(G.shape[0]), d):
        M = G[list(rows)]
        if abs(np.linalg.det(M)) < 1e-10:
            continue
        v = np.linalg.solve(M, g[list(rows)])
        if np.all(G @ v <= g + 1e-9):
            best = min(best, float(c @ v))
    return best


@pytest.mark.parametrize("d", [2, 3])
def test_lp_with_free_variables_matches_vertex_enumeration(d, rng):
    for _ in range(25):
        G, g = _polytope(rng, d, 6)
        c = rng.normal(size=d)
        X = FeasibleSet(dim=d, halfspaces=[Halfspaces(G=G, g=g)])
        x, value = ConvexSolver().solve_objective([(1.0, Affine(a=c))], X)
        assert np.all(G @ x <= g + 1e-8)
        assert value == pytest.approx(_vertex_minimum(G, g, c), abs=1e-8)


def _random_objective(rng, d: int, conic: bool) -> list:
    M = rng.normal(size=(d, d))
    pool = [
        NormAffine(p=NormKind.L1, A=rng.normal(size=(2, d)), c=rng.normal(size=2)),
        NormAffine(p=NormKind.LINF, A=rng.normal(size=(2, d)), c=rng.normal(size=2)),
        MaxAffine(A=rng.normal(size=(3, d)), b=rng.normal(size=3)),
        Quadratic(P=M @ M.T, a=rng.normal(size=d), b=0.0),
    ]
    if conic:
        pool.append(NormAffine(p=NormKind.L2, A=rng.normal(size=(2, d)), c=rng.normal(size=2)))
    chosen = rng.choice(len(pool), size=2, replace=False)
    return [(float(rng.uniform(0.5, 2.0)), pool[i]) for i in chosen] + [(1.0, Affine(a=rng.normal(size=d)))]


def _subgradient_value(objective, X) -> float:
    cfg = SolverConfig(method=SolveMethod.SUBGRADIENT, subgradient_max_iters=3000)
    try:
        return ConvexSolver(cfg).solve_objective(objective, X)[1]
    except IterationLimitException as exc:
        return exc.value


def test_solution_beats_random_feasible_points(rng):
    X = FeasibleSet(dim=2, box=Box.uniform(2, -2.0, 2.0), halfspaces=[Halfspaces(G=[[1.0, 1.0]], g=[1.0])])
    for _ in range(10):
        objective = _random_objective(rng, 2, conic=True)
        x, value = ConvexSolver().solve_objective(objective, X)
        assert X.contains(x, tol=1e-7)
        ys = rng.uniform(-2.0, 2.0, size=(400, 2))
        ys = ys[ys.sum(axis=1) <= 1.0][:100]
        for y in ys:
            assert value <= weighted_value(objective, y) + 1e-7


def test_solve_is_bit_identical(rng):
    X = FeasibleSet.from_box([-2.0, -2.0, -2.0], [2.0, 2.0, 2.0])
    for conic in (False, True):
        objective = _random_objective(rng, 3, conic=conic)
        first = ConvexSolver().solve_objective(objective, X)
        second = ConvexSolver().solve_objective(objective, X)
        assert np.array_equal(first[0], second[0])
        assert first[1] == second[1]


def test_lowered_model_agrees_with_subgradient_method(rng):
    X = FeasibleSet.from_box([-2.0, -2.0], [2.0, 2.0])
    for _ in range(50):
        objective = _random_objective(rng, 2, conic=True)
        _, value = ConvexSolver().solve_objective(objective, X)
        reference = _subgradient_value(objective, X)
        assert value <= reference + 1e-7
        assert reference <= value + 5e-2 * (1.0 + abs(value))


class _ShiftedBackend:
    """把参考解整体平移 1, 得到违反约束的点"""

    def solve(self, model, cfg):
        solution = ReferenceBackend().solve(model, cfg)
        z = solution.z + 1.0
        return ModelSolution(z, model.objective(z), solution.iterations)


def test_infeasible_backend_point_is_rejected():
    X = FeasibleSet.from_box([-1.0, -2.0], [3.0, 4.0])
    with pytest.raises(IterationLimitException):
        ConvexSolver(backend=_ShiftedBackend()).solve_objective([(1.0, Affine(a=[1.0, -1.0]))], X)


def test_infeasible_backend_point_falls_back_under_auto():
    X = FeasibleSet.from_box([-3.0, -3.0], [3.0, 3.0])
    objective = [(1.0, NormAffine(p=NormKind.L2, A=np.eye(2), c=[-1.0, -2.0])), (1.0, Affine(a=[0.1, 0.0]))]
    x, value = ConvexSolver(backend=_ShiftedBackend()).solve_objective(objective, X)
    assert X.contains(x)
    assert value == pytest.approx(0.1, abs=1e-3)
