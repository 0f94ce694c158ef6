import numpy as np
import pytest

from app.core import settings
from app.handler.exception_handlers import MissingBoundsException
from app.model.dto.solver import Budget
from app.model.entity.atoms import Affine, Const, MaxAffine, Quadratic
from app.model.entity.bounds import SBounds
from app.model.entity.feasible import FeasibleSet, NormBall
from app.model.entity.problem import SmcProblem
from app.model.field_enum import CertifyStatus, LocalStrategy, MicpStatus, NormKind
from app.services.micp import get_micp_service, model_stats, sbounds_crude, value_function
from app.services.problems import box_neighbourhood, fully_active
from app.services.smc import all_component_values, get_smc_service, objective, sum_of_maxima


def _pair(h_plus, h_l, X) -> SmcProblem:
    return SmcProblem(terms=[[h_plus, h_l]], X=X)


def _quadratic(p: float) -> Quadratic:
    return Quadratic(P=[[p]], a=[0.0], b=0.0)


def test_crude_bounds():
    assert sbounds_crude(4.0, 1.0) == 3.0
    assert sbounds_crude(0.7, 0.7) == 0.0


def test_smooth_bound():
    p = _pair(_quadratic(2.0), Const(value=0.0), FeasibleSet.from_box([-1.0], [1.0]))
    assert get_micp_service().sbounds_smooth(p, 0, 0, 1) == pytest.approx(4.0)


def test_max_affine_bound():
    p = _pair(MaxAffine(A=[[1.0], [-1.0]], b=[0.0, 0.0]), Const(value=0.0), FeasibleSet.from_box([-1.0], [1.0]))
    assert get_micp_service().sbounds_maxaffine(p, 0, 0, 1) == pytest.approx(1.0)


def test_trust_region_bound():
    ball = FeasibleSet(dim=1, balls=[NormBall(p=NormKind.L2, center=[0.0], radius=1.0)])
    service = get_micp_service()
    assert service.sbounds_trs(_pair(Const(value=0.0), _quadratic(2.0), ball), 0, 0, 1) == pytest.approx(0.0, abs=1e-12)
    assert service.sbounds_trs(_pair(_quadratic(2.0), Const(value=0.0), ball), 0, 0, 1) == pytest.approx(1.0)
    assert service.sbounds_trs(_pair(Const(value=3.0), Const(value=1.0), ball), 0, 0, 1) == pytest.approx(2.0)


@pytest.mark.parametrize("name", ["kink", "two_clip", "valley"])
def test_auto_bounds_are_valid(request, rng, name):
    p = request.getfixturevalue(name)
    bounds = get_micp_service().auto_sbounds(p)
    lo, hi = p.X.bounding_box()
    for u in rng.uniform(lo, hi, size=(10000, p.dim)):
        for s, h in enumerate(all_component_values(p, u)):
            for l in np.flatnonzero(h <= h.min() + 1e-9):
                assert np.all(h - h[l] <= bounds.M[s][:, l] + 1e-9)


def test_bound_report_names_methods(kink):
    bounds, methods = get_micp_service().bound_report(kink)
    assert bounds.sizes == (3,)
    assert np.all(np.diag(bounds.M[0]) == 0.0)
    assert methods[0][1][0] == "smooth"
    assert methods[0][0][1] == "maxaffine"
    assert methods[0][2][2] == "diagonal"


def test_value_function(saddle, rng):
    bounds = get_micp_service().auto_sbounds(saddle)
    for x in rng.uniform(-10.0, 10.0, size=(200, 2)):
        assert value_function(saddle, bounds, 1.0, x) == pytest.approx(objective(saddle, x), abs=1e-9)
        assert value_function(saddle, bounds, 0.0, x) == pytest.approx(sum_of_maxima(saddle, x), abs=1e-9)
        values = [value_function(saddle, bounds, C, x) for C in (0.0, 0.25, 0.5, 0.75, 1.0)]
        assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))
    with pytest.raises(ValueError):
        value_function(saddle, bounds, 1.5, np.zeros(2))


def test_global_model_structure(saddle):
    service = get_micp_service()
    model = service.build_global_model(saddle, service.auto_sbounds(saddle))
    assert model.binaries == 5
    assert model_stats(model).binaries == 5
    with pytest.raises(MissingBoundsException):
        service.build_global_model(saddle, None)
    with pytest.raises(MissingBoundsException):
        service.build_global_model(saddle, SBounds(M=[np.zeros((3, 3))]))


@pytest.mark.parametrize("name", ["kink", "two_clip", "valley", "saddle", "fully_active_2x3"])
def test_micp_matches_enumeration(request, name):
    p = request.getfixturevalue(name)
    service = get_micp_service()
    result = service.solve_micp(service.build_global_model(p, service.auto_sbounds(p)))
    expected = get_smc_service().enumerate_global(p)
    assert result.status == MicpStatus.OPTIMAL
    assert result.value == pytest.approx(expected.value, abs=1e-6)
    assert objective(p, result.x) == pytest.approx(expected.value, abs=1e-6)
    for node in result.node_log:
        if node.status == "integral":
            assert node.bound >= result.value - 1e-7


def test_micp_kink_value(kink):
    service = get_micp_service()
    result = service.solve_micp(service.build_global_model(kink, service.auto_sbounds(kink)))
    assert result.value == pytest.approx(-33 / 16, abs=1e-6)
    assert result.selection == (2,)


def test_single_selection_is_one_relaxation():
    p = SmcProblem(terms=[[Affine(a=[1.0])], [_quadratic(2.0)]], X=FeasibleSet.from_box([-1.0], [1.0]))
    service = get_micp_service()
    model = service.build_global_model(p, SBounds(M=[np.zeros((1, 1)), np.zeros((1, 1))]))
    result = service.solve_micp(model)
    assert model.binaries == 0
    assert result.status == MicpStatus.OPTIMAL and result.nodes == 1
    assert result.value == pytest.approx(objective(p, result.x), abs=1e-8)


def test_micp_without_budget(kink):
    service = get_micp_service()
    model = service.build_global_model(kink, service.auto_sbounds(kink))
    assert service.solve_micp(model, Budget(time_limit=0.0, node_cap=10)).status == MicpStatus.NO_SOLUTION


def test_local_model_binaries(kink):
    service = get_micp_service()
    model = service.build_local_model(kink, np.array([-1 / 16]), 0.0, box_neighbourhood([-1 / 16], 0.4375, 0.3125))
    assert model.binaries == 2 and model.degenerate == [0]
    model = service.build_local_model(kink, np.array([0.3]), 0.0, box_neighbourhood([0.3], 0.1, 0.1))
    assert model.binaries == 0


def test_certify_at_flat_point(kink):
    verdict = get_micp_service().certify_or_improve(kink, np.array([0.0]), region=box_neighbourhood([0.0], 0.05, 0.05))
    assert verdict.status == CertifyStatus.CERTIFIED
    assert verdict.local_value == pytest.approx(-1 / 8, abs=1e-9)
    assert verdict.strategy == LocalStrategy.ENUMERATION


def test_certify_improves_degenerate_point(kink):
    verdict = get_micp_service().certify_or_improve(kink, np.array([-1 / 16]),
                                                    region=box_neighbourhood([-1 / 16], 0.4375, 0.3125))
    assert verdict.status == CertifyStatus.IMPROVED
    assert verdict.x[0] == pytest.approx(-0.5, abs=1e-8)
    assert verdict.value == pytest.approx(-9 / 16, abs=1e-9)
    assert verdict.degeneracy_factor == 2


def test_certify_through_local_micp(kink, monkeypatch):
    monkeypatch.setattr(settings.micp, "enumeration_threshold", 1)
    verdict = get_micp_service().certify_or_improve(kink, np.array([-1 / 16]),
                                                    region=box_neighbourhood([-1 / 16], 0.4375, 0.3125))
    assert verdict.strategy == LocalStrategy.MICP
    assert verdict.binaries == 2
    assert verdict.status == CertifyStatus.IMPROVED
    assert verdict.value == pytest.approx(-9 / 16, abs=1e-6)


def test_certify_two_clip_midpoint(two_clip):
    verdict = get_micp_service().certify_or_improve(two_clip, np.array([0.5]),
                                                    region=box_neighbourhood([0.5], 0.05, 0.05))
    assert verdict.status == CertifyStatus.CERTIFIED
    assert verdict.local_value == pytest.approx(0.0, abs=1e-9)


def test_certify_without_budget(kink):
    verdict = get_micp_service().certify_or_improve(kink, np.array([0.0]), budget=Budget(time_limit=0.0, node_cap=1))
    assert verdict.status == CertifyStatus.INCONCLUSIVE


@pytest.mark.parametrize("x_hat", [-1.0, -0.5, 0.0, 0.3, 1.2])
def test_certify_agrees_with_grid(kink, x_hat):
    region = box_neighbourhood([x_hat], 0.01, 0.01)
    verdict = get_micp_service().certify_or_improve(kink, np.array([x_hat]), region=region)
    grid = np.arange(x_hat - 0.01, x_hat + 0.01 + 1e-12, 1e-3)
    grid_min = min(objective(kink, np.array([u])) for u in grid if -2.0 <= u <= 2.0)
    if verdict.status == CertifyStatus.CERTIFIED:
        assert grid_min >= verdict.value_hat - 1e-9
    if verdict.status == CertifyStatus.IMPROVED:
        assert verdict.value < verdict.value_hat


def test_certify_and_restart_reaches_global(kink):
    report = get_micp_service().certify_and_restart(
        kink, np.array([-1 / 16]), lambda x: box_neighbourhood(x, 0.4375, 0.3125))
    assert report.restarts == 1
    assert report.final_value == pytest.approx(-33 / 16, abs=1e-9)
    assert report.verdicts[0].status == CertifyStatus.IMPROVED
    assert report.verdicts[-1].status == CertifyStatus.CERTIFIED
    assert report.enhancement_pct == pytest.approx(1550.0, rel=1e-6)


def test_fully_active_midpoints():
    p = fully_active(2, [2, 3], 2)
    service = get_micp_service()
    for sigma in p.selections():
        x = np.array([-(l + 1) + 0.5 for l in sigma])
        H = all_component_values(p, x)
        assert tuple(int(np.argmin(h)) for h in H) == sigma
        assert all(np.sum(h <= h.min() + 1e-12) == 1 for h in H)
    assert service.auto_sbounds(p).sizes == (2, 3)
