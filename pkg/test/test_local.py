import numpy as np
import pytest

from app.model.dto.schedule import Schedule
from app.model.entity.atoms import Affine
from app.model.entity.feasible import FeasibleSet
from app.model.entity.problem import SmcProblem, WeightedSubproblem
from app.model.entity.weights import Weights
from app.model.field_enum import CandidateKind, CriticalityStatus, EpsilonRule, Termination
from app.services.funcs import greedy_vertex
from app.services.local import (
    candidate_bb,
    candidate_mm,
    candidate_sm,
    exploration_epsilon,
    get_dca_service,
    get_ram_service,
    q_update,
    sample_weights,
    start_streams,
)
from app.services.problems import plr_build, plr_synthetic, rfl_build, rfl_synthetic
from app.services.smc import get_smc_service, objective


def test_candidates():
    assert np.allclose(candidate_bb(np.array([0.5, 0.5]), 0, 0.1), [0.6, 0.4])
    assert np.allclose(candidate_mm(np.array([0.0, 1.0, 2.0]), 1.0), [0.75, 0.25, 0.0])
    assert np.allclose(candidate_mm(np.array([3.0, 3.0]), 1.0), [0.5, 0.5])
    assert np.allclose(candidate_sm(np.array([1.0, 1.0]), 2.0), [0.5, 0.5])
    q = candidate_sm(np.array([0.0, 10.0]), 5.0, normalize=False)
    assert q[0] > 0.99


def test_exploration_epsilon():
    q_star, q_hat, h = np.array([1.0, 0.0]), np.array([0.0, 1.0]), np.array([0.0, 1.0])
    assert exploration_epsilon(np.array([0.5, 0.5]), q_star, q_hat, h, 0.5) == pytest.approx(0.25)
    assert exploration_epsilon(q_star, q_star, q_star, h, 0.5) == 1.0
    assert np.allclose(q_update(q_star, q_hat, 0.25), [0.75, 0.25])


def test_sampled_weights_are_reproducible():
    first = sample_weights((2, 3), start_streams(7, 4)[0])
    again = sample_weights((2, 3), start_streams(7, 4)[0])
    other = sample_weights((2, 3), start_streams(7, 5)[0])
    assert first.sizes == (2, 3)
    assert all(np.array_equal(a, b) for a, b in zip(first.q, again.q))
    assert not np.array_equal(first.q[1], other.q[1])


def test_schedule_presets():
    sm, mm, alter = Schedule.preset("sm"), Schedule.preset("mm"), Schedule.preset("alter")
    assert sm.c_at(1) == pytest.approx(2 / 3)
    assert sm.kappa_at(1) == pytest.approx(1.5)
    assert mm.kappa_at(8) == pytest.approx(4.0)
    assert alter.kappa_at(10) == 0.25 and not alter.normalize
    with pytest.raises(ValueError):
        Schedule(candidate=CandidateKind.NONE, epsilon_rule=EpsilonRule.DECREASE)


def test_gain_and_criticality(kink):
    service = get_ram_service()
    x = np.array([0.0])
    verdict = service.criticality_certificate(kink, x, Weights.vertex((1,), kink.sizes))
    assert verdict.gain == pytest.approx(1 / 8)
    assert verdict.status == CriticalityStatus.UNKNOWN
    verdict = service.criticality_certificate(kink, x, service.greedy_weights(kink, x))
    assert verdict.status == CriticalityStatus.CRITICAL


def test_coverage_greedy_weights():
    p = SmcProblem(
        terms=[[Affine(a=[1.0]), Affine(a=[1.0], b=1.0)],
               [Affine(a=[2.0]), Affine(a=[2.0], b=0.5)]],
        X=FeasibleSet.from_box([0.0], [1.0]),
        coverage=True,
    )
    weights = get_ram_service().greedy_weights(p, np.array([0.0]))
    assert np.allclose(weights.q[0], [1.0, 0.0], atol=1e-9)
    assert np.allclose(weights.q[1], [0.0, 1.0], atol=1e-9)


@pytest.mark.parametrize("method", ["am", "bb", "sm", "mm", "alter"])
def test_ram_trace_is_consistent(saddle, method):
    init_rng, run_rng = start_streams(3, 0)
    trace = get_ram_service().run(saddle, sample_weights(saddle.sizes, init_rng), Schedule.preset(method),
                                  k_max=50, rng=run_rng)
    assert 1 <= trace.iterations <= 50
    assert trace.best_value == pytest.approx(min(r.f for r in trace.records))
    assert trace.best_value == pytest.approx(objective(saddle, trace.best_x), abs=1e-9)
    assert trace.best_value >= 0.75 - 1e-7
    assert all(r.gain >= -1e-9 and r.f <= r.fbar + 1e-9 for r in trace.records)


def test_am_surrogate_is_monotone(valley):
    trace = get_ram_service().run(valley, Weights.uniform(valley.sizes), Schedule.preset("am"), k_max=40)
    fbars = [r.fbar for r in trace.records]
    assert all(b <= a + 1e-9 for a, b in zip(fbars, fbars[1:]))


def test_am_stalls_where_alternating_escapes(valley):
    service = get_ram_service()
    x0 = np.array([3.0])
    am = service.run_from_point(valley, x0, Schedule.preset("am"))
    assert am.termination == Termination.DELTA
    assert am.best_value == pytest.approx(-2.0625)
    alter = service.run_from_point(valley, x0, Schedule.preset("alter"), delta=-np.inf, k_max=30)
    assert alter.termination == Termination.K_MAX
    assert alter.best_value <= -2.75 + 1e-9
    assert alter.best_value < am.best_value


def test_dca_is_monotone(kink, saddle):
    service = get_dca_service()
    for p, x0 in ((kink, np.array([1.0])), (saddle, np.array([4.0, 4.0]))):
        trace = service.run(p, x0, k_max=60)
        values = [r.f for r in trace.records]
        assert np.allclose(trace.records[0].x, x0)
        assert all(b <= a + 1e-8 for a, b in zip(values, values[1:]))
        assert trace.termination in (Termination.DELTA, Termination.K_MAX)


def test_exploration_keeps_sufficient_decrease(rng):
    for _ in range(10_000):
        n = int(rng.integers(2, 6))
        h = rng.normal(size=n)
        q, q_hat = rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n))
        q_star = greedy_vertex(h)
        C = float(rng.uniform(0.0, 1.0))
        gain = float((q - q_star) @ h)
        q_next = q_update(q_star, q_hat, exploration_epsilon(q, q_star, q_hat, h, C))
        assert float((q - q_next) @ h) >= (1.0 - C) * gain - 1e-9


def test_exploration_equality_case():
    h, q, q_star, q_hat = np.array([0.0, 1.0]), np.array([0.0, 1.0]), np.array([1.0, 0.0]), np.array([0.5, 0.5])
    eps = exploration_epsilon(q, q_star, q_hat, h, 0.5)
    assert eps == 1.0
    assert float((q - q_update(q_star, q_hat, eps)) @ h) == 0.5


def _check_descent(trace, f_lower: float):
    records = trace.records
    tol = 1e-7 * max(1.0, abs(records[0].fbar))
    for prev, cur in zip(records, records[1:]):
        assert cur.fbar <= prev.fbar - prev.decrease + tol
    for r in records:
        assert r.decrease >= (1.0 - r.c) * r.gain - 1e-9 * max(1.0, abs(r.fbar))
    # Σ (1 - C_k)·gain_k ≤ F̄(x_1, Q_1) - F*
    total = sum((1.0 - r.c) * r.gain for r in records[:-1])
    assert total <= records[0].fbar - f_lower + len(records) * tol


@pytest.mark.parametrize("name", ["kink", "two_clip", "saddle", "valley"])
def test_relaxed_am_descent_on_toys(name, request):
    p = request.getfixturevalue(name)
    f_star = get_smc_service().enumerate_global(p).value
    service = get_ram_service()
    for start in range(20):
        init_rng, run_rng = start_streams(0, start)
        schedule = Schedule.preset(["sm", "mm", "am"][start % 3])
        trace = service.run(p, sample_weights(p.sizes, init_rng), schedule, k_max=30, rng=run_rng, start=start)
        _check_descent(trace, f_star)
        assert trace.best_value >= f_star - 1e-7


def test_relaxed_am_descent_on_regression_and_location():
    service = get_ram_service()
    # 两类目标都是非负的, 0 可作为 F* 的下界
    for p in (plr_build(plr_synthetic(60, 6, 2, 2, seed=1)), rfl_build(rfl_synthetic(12, 2, seed=1))):
        for start in range(4):
            init_rng, run_rng = start_streams(1, start)
            schedule = Schedule.preset(["sm", "mm"][start % 2])
            trace = service.run(p, sample_weights(p.sizes, init_rng), schedule, k_max=10, rng=run_rng, start=start)
            assert trace.termination != Termination.SOLVER_ERROR
            _check_descent(trace, 0.0)


def test_mm_on_regression_keeps_lp_bounded():
    p = plr_build(plr_synthetic(60, 6, 2, 2, seed=1))
    init_rng, run_rng = start_streams(1, 3)
    trace = get_ram_service().run(p, sample_weights(p.sizes, init_rng), Schedule.preset("mm"), delta=-np.inf,
                                  k_max=3, rng=run_rng, start=3)
    assert trace.termination == Termination.K_MAX
    assert trace.iterations == 3
    assert trace.best_value >= 0.0


def test_dca_follows_am_on_regression():
    p = plr_build(plr_synthetic(20, 3, 2, 2, seed=2))
    q_init = sample_weights(p.sizes, start_streams(2, 0)[0])
    am = get_ram_service().run(p, q_init, Schedule.preset("am"), delta=-np.inf, k_max=10)
    dca = get_dca_service()
    x_init, _ = dca.solver.solve_convex(WeightedSubproblem(problem=p, weights=q_init))
    trace = dca.run(p, x_init, delta=-np.inf, k_max=10)
    assert am.iterations == 10 and trace.iterations == 10
    for k in range(10):
        assert np.abs(am.records[k].x - trace.records[k].x).max() <= 1e-9


def test_valley_sweep_from_equidistant_starts(valley):
    service = get_ram_service()
    starts = np.linspace(-5.0, 5.0, 100)
    alter = [service.run_from_point(valley, np.array([x0]), Schedule.preset("alter"), delta=-np.inf, k_max=100)
             for x0 in starts]
    reached = [t for t in alter if t.best_value <= -3.0 + 1e-7]
    assert 0 < len(reached) < len(starts)
    assert all(t.best_x[0] == pytest.approx(-2.0, abs=1e-6) for t in reached)
    # 其余起点停在 AM 不动点 x = -1 (F̄' = 1.5x + 1.5 = 0), F = -2.75
    stalled = [t for t in alter if t.best_value > -3.0 + 1e-7]
    assert all(t.best_x[0] == pytest.approx(-1.0, abs=1e-6) for t in stalled)
    assert all(t.best_value == pytest.approx(-2.75, abs=1e-9) for t in stalled)

    am = [service.run_from_point(valley, np.array([x0]), Schedule.preset("am")) for x0 in starts]
    am_reached = sum(t.best_value <= -3.0 + 1e-7 for t in am)
    assert 0 < am_reached < len(starts)
    assert am_reached <= len(reached)
