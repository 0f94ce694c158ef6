import numpy as np
import pytest

from app.handler.exception_handlers import CapExceededException
from app.model.entity.problem import Selection
from app.services.funcs import subgradient
from app.services.problems import fully_active
from app.services.smc import active_set, component_values, degeneracy, fbar, get_smc_service, objective, sum_of_maxima
from app.model.entity.weights import Weights


def test_objective_on_two_clip(two_clip):
    for x in (0.0, 0.5, 1.0):
        assert objective(two_clip, np.array([x])) == pytest.approx(0.0, abs=1e-15)


def test_objective_fully_active_single_term():
    p = fully_active(1, [2], 1)
    assert objective(p, np.array([-1.5])) == pytest.approx(-2.0)
    assert np.allclose(component_values(p, np.array([0.0]), 0), [0.0, 1.0])


def test_active_sets(two_clip, kink):
    assert active_set(two_clip, np.array([0.0]), 0, rho=1.0) == [0, 1]
    assert active_set(two_clip, np.array([0.0]), 0, rho=0.0) == [1]
    assert active_set(kink, np.array([-1 / 16]), 0) == [0, 2]
    with pytest.raises(ValueError):
        active_set(kink, np.array([0.0]), 0, rho=1.5)


def test_degeneracy(kink, two_clip):
    assert degeneracy(kink, np.array([0.3])) == ([], 1)
    assert degeneracy(kink, np.array([-1 / 16])) == ([0], 2)
    assert degeneracy(two_clip, np.array([0.5]), rho=1.0)[1] == 4


def test_fbar_and_sum_of_maxima(kink):
    x = np.array([0.5])
    assert fbar(kink, x, Weights.vertex((1,), kink.sizes)) == pytest.approx(0.75)
    assert sum_of_maxima(kink, x) == pytest.approx(0.5 + 0.9375)


def test_piece_values(kink):
    service = get_smc_service()
    assert service.piece_value(kink, (2,))[0] == pytest.approx(-33 / 16)
    value, x = service.piece_value(kink, (1,))
    assert value == pytest.approx(0.0, abs=1e-9) and x[0] == pytest.approx(0.0, abs=1e-6)
    assert service.piece_value(kink, (0,))[0] == pytest.approx(-1 / 8)


def test_enumerate_global_ties_take_smallest_selection(two_clip):
    result = get_smc_service().enumerate_global(two_clip)
    assert result.value == pytest.approx(0.0, abs=1e-9)
    assert result.sigma == (0, 0)
    assert set(result.optimal_selections) == {(0, 0), (0, 1), (1, 0)}
    assert result.pieces == 4


def test_enumerate_global_known_optima(kink, saddle, valley, fully_active_2x3):
    service = get_smc_service()
    assert service.enumerate_global(kink).value == pytest.approx(-33 / 16)
    result = service.enumerate_global(saddle)
    assert result.value == pytest.approx(0.75, abs=1e-7)
    assert np.allclose(result.x, [-2.5, 0.0], atol=1e-5)
    assert result.sigma == (1, 1)
    result = service.enumerate_global(valley)
    assert result.value == pytest.approx(-3.0, abs=1e-9)
    assert result.sigma == (3, 0)
    assert service.enumerate_global(fully_active_2x3).value == pytest.approx(-0.25, abs=1e-9)


def test_enumerate_is_independent_of_workers(saddle):
    service = get_smc_service()
    serial, threaded = service.enumerate_global(saddle), service.enumerate_global(saddle, workers=3)
    assert serial.sigma == threaded.sigma
    assert serial.value == threaded.value


def test_enumerate_cap(saddle):
    with pytest.raises(CapExceededException):
        get_smc_service().enumerate_global(saddle, cap=5)


def test_selection_bounds():
    assert Selection(sigma=(0, 2)).check((1, 3)).sigma == (0, 2)
    with pytest.raises(ValueError):
        Selection(sigma=(0, 3)).check((1, 3))


def _sample_box(p, rng, size: int) -> np.ndarray:
    return rng.uniform(p.X.box.lo, p.X.box.hi, size=(size, p.dim))


@pytest.mark.parametrize("name", ["kink", "saddle", "valley", "fully_active_2x3"])
def test_objective_is_min_over_selections(name, request, rng):
    p = request.getfixturevalue(name)
    selections = list(p.selections())
    for x in _sample_box(p, rng, 1000):
        pieces = [fbar(p, x, Weights.vertex(sigma, p.sizes)) for sigma in selections]
        assert objective(p, x) == pytest.approx(min(pieces), abs=1e-10)


@pytest.mark.parametrize("name", ["saddle", "valley", "fully_active_2x3"])
def test_active_set_is_stable_near_a_point(name, request, rng):
    p = request.getfixturevalue(name)
    rho = 0.25
    for x_hat in _sample_box(p, rng, 100):
        H = [component_values(p, x_hat, s) for s in range(p.N)]
        spread = min(float(h.max() - h.min()) for h in H)
        if spread < 1e-6:
            continue
        lipschitz = max(np.linalg.norm(subgradient(atom, x_hat)) for row in p.terms for atom in row)
        radius = 0.1 * rho * spread / (1.0 + 2.0 * lipschitz)
        expected = [set(active_set(p, x_hat, s, rho)) for s in range(p.N)]
        for _ in range(20):
            u = rng.normal(size=p.dim)
            x = x_hat + radius * rng.uniform() * u / np.linalg.norm(u)
            for s in range(p.N):
                assert set(active_set(p, x, s)) <= expected[s]
