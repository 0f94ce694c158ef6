import numpy as np
import pytest

from app.handler.exception_handlers import BadDimsException, ConfigException
from app.model.dto.bench import InstanceSpec
from app.model.dto.problem_spec import PlrSpec, RflSpec
from app.model.entity.atoms import Const
from app.model.field_enum import ClusterConstraint, NormKind
from app.repository import get_dataset_mapper, get_instance_mapper
from app.services.micp import get_micp_service
from app.services.problems import (
    clustering_constraints,
    fully_active,
    load_instance,
    plr_build,
    plr_feature_expand,
    plr_local_sbounds,
    plr_loss,
    plr_neighbourhood,
    plr_spec_from_frame,
    plr_synthetic,
    rfl_build,
    rfl_centroids,
    rfl_cost,
    rfl_local_sbounds,
    rfl_spec_from_frame,
    rfl_synthetic,
    toy_library,
)
from app.services.smc import all_component_values, objective


def test_fully_active_components():
    p = fully_active(1, [2], 1)
    assert all_component_values(p, np.array([0.0]))[0][0] == 0.0
    assert np.argmin(all_component_values(p, np.array([-0.5]))[0]) == 0
    assert np.argmin(all_component_values(p, np.array([-1.5]))[0]) == 1
    assert p.X.box.lo[0] == -2.0
    with pytest.raises(BadDimsException):
        fully_active(3, [2, 2, 2], 2)
    with pytest.raises(BadDimsException):
        fully_active(2, [2], 2)


def test_toy_library_documented_points():
    toys = toy_library()
    assert set(toys) == {"kink", "two_clip", "saddle", "valley"}
    assert objective(toys["saddle"], np.array([-2.5, 0.0])) == pytest.approx(0.75)
    assert objective(toys["two_clip"], np.array([1.0])) == pytest.approx(0.0)
    assert objective(toys["kink"], np.array([0.0])) == pytest.approx(-1 / 8)
    assert objective(toys["valley"], np.array([-2.0])) == pytest.approx(-3.0)


def test_plr_feature_expand():
    assert np.allclose(plr_feature_expand(np.array([2.0, 3.0])), [2.0, 3.0, 4.0, 6.0, 9.0])
    assert plr_feature_expand(np.ones(6)).shape == (27,)
    assert plr_feature_expand(np.array([5.0])).shape == (2,)
    assert plr_feature_expand(np.ones((4, 2))).shape == (4, 5)


def test_plr_index_maps():
    spec = PlrSpec(gamma=[0.0], beta=[[1.0]], B1=6, B2=5)
    assert spec.n_bar == 30
    assert (spec.e1(6), spec.e2(6)) == (1, 1)
    assert spec.d == 11


def test_plr_identity(rng):
    spec = plr_synthetic(N=15, p=3, B1=2, B2=3, seed=5)
    p = plr_build(spec)
    assert p.sizes == (6,) * 15
    for x in rng.normal(scale=2.0, size=(100, spec.d)):
        assert objective(p, x) == pytest.approx(plr_loss(spec, x), abs=1e-9)


def test_plr_bound_formula():
    spec = PlrSpec(gamma=[0.0], beta=[[1.0]], B1=2, B2=2)
    bounds = plr_local_sbounds(spec, np.array([0.0, 0.3, 0.0, 0.0]), 0.1, dual_norms=[2.0])
    assert bounds.M[0][0, 3] == pytest.approx(1.1)
    assert np.all(np.diag(bounds.M[0]) == 0.0)
    with pytest.raises(ValueError):
        plr_local_sbounds(spec, np.zeros(4), 0.0)


def test_plr_bounds_are_valid(rng):
    spec = plr_synthetic(N=6, p=2, B1=2, B2=2, seed=1, norm=NormKind.LINF)
    p = plr_build(spec)
    x_hat = rng.normal(size=spec.d)
    R = 0.1
    bounds = plr_local_sbounds(spec, x_hat, R)
    region = plr_neighbourhood(spec, x_hat, R)
    for u in x_hat + R * rng.uniform(-1.0, 1.0, size=(2000, spec.d)):
        assert region.contains(u)
        for s, h in enumerate(all_component_values(p, u)):
            for l in np.flatnonzero(h <= h.min() + 1e-9):
                assert np.all(h - h[l] <= bounds.M[s][:, l] + 1e-9)


def test_rfl_objective_matches_direct_cost(rng):
    spec = rfl_synthetic(N=10, B=3, seed=2, R_ref=1.0, penalty=2.5)
    p = rfl_build(spec)
    assert p.dim == 9
    for x in rng.uniform(0.0, 4.0, size=(100, spec.d)):
        assert objective(p, x) == pytest.approx(rfl_cost(spec, x), abs=1e-9)


def test_rfl_without_penalty():
    spec = RflSpec(population=[3.0], beta=[[0.0, 0.0]], B=1)
    p = rfl_build(spec)
    assert isinstance(p.hbar, Const)
    x = np.zeros(spec.d)
    x[0] = 1.0
    assert objective(p, x) == 0.0
    assert p.X.contains(x)
    x[spec.store_slice(1)] = [2.0, 0.0]
    assert not p.X.contains(x)


def test_rfl_bound_formula():
    spec = RflSpec(population=[5.0], beta=[[1.0, 2.0]], B=2)
    x_hat = np.array([1.0, 0.0, 0.0, 1.0, 2.0, 1.0, 2.0])
    bounds = rfl_local_sbounds(spec, x_hat, 0.2)
    assert bounds.M[0][0, 1] == pytest.approx(0.4)
    assert bounds.M[0][1, 1] == 0.0


def test_rfl_bounds_are_valid(rng):
    spec = rfl_synthetic(N=8, B=2, seed=3)
    p = rfl_build(spec)
    x_hat = np.concatenate([[1.0], rng.uniform(0.0, 4.0, size=spec.d - 1)])
    R_inf = 0.2
    bounds = rfl_local_sbounds(spec, x_hat, R_inf)
    for u in x_hat + R_inf * rng.uniform(-1.0, 1.0, size=(2000, spec.d)):
        for s, h in enumerate(all_component_values(p, u)):
            for l in np.flatnonzero(h <= h.min() + 1e-9):
                assert np.all(h - h[l] <= bounds.M[s][:, l] + 1e-9)


def test_clustering_order_and_hull():
    spec = rfl_synthetic(N=4, B=2, seed=0)
    p = rfl_build(spec)
    ordered = clustering_constraints(p, spec.beta, rfl_centroids(spec), ClusterConstraint.ORDER)
    x = np.concatenate([[5.0], spec.beta[0], spec.beta[0], spec.beta[0]])
    assert ordered.X.contains(x)
    single_spec = RflSpec(population=[1.0], beta=[[0.0, 0.0]], B=1)
    single = rfl_build(single_spec)
    assert clustering_constraints(single, single_spec.beta, rfl_centroids(single_spec), ClusterConstraint.ORDER) is single

    hull = clustering_constraints(p, spec.beta, rfl_centroids(spec), ClusterConstraint.HULL)
    assert hull.dim == p.dim + 2 * 4
    lam = np.zeros(8)
    lam[0], lam[4 + 1] = 1.0, 1.0
    z = np.concatenate([[10.0], spec.beta[0], spec.beta[0], spec.beta[1], lam])
    assert hull.X.contains(z, tol=1e-9)
    assert objective(hull, z) == pytest.approx(objective(p, z[:p.dim]))


def test_clustering_coverage_single_store():
    spec = RflSpec(population=[2.0], beta=[[1.0, 1.0]], B=1)
    p = clustering_constraints(rfl_build(spec), spec.beta, rfl_centroids(spec), ClusterConstraint.COVERAGE)
    assert p.coverage
    service = get_micp_service()
    model = service.build_global_model(p, service.auto_sbounds(p))
    assert model.binaries == 0
    assert service.solve_micp(model).value == pytest.approx(0.0, abs=1e-7)


def test_datasets_from_resources():
    plr = plr_spec_from_frame(get_dataset_mapper().read_plr("plr_example.csv"), 2, 2)
    assert plr.p == 9 and plr.N == 24
    rfl = rfl_spec_from_frame(get_dataset_mapper().read_rfl("rfl_example.csv"), 3)
    assert rfl.N == 12 and rfl.d == 9


def test_load_instance_sources(tmp_path):
    assert load_instance(InstanceSpec(name="kink")).problem.name == "kink"
    assert load_instance(InstanceSpec(source="fully_active", params={"N": 2, "n": [2, 3]})).problem.sizes == (2, 3)
    loaded = load_instance(InstanceSpec(source="plr", params={"N": 8, "p": 2, "B1": 2, "B2": 2}))
    assert loaded.plr is not None and loaded.problem.dim == 8
    loaded = load_instance(InstanceSpec(source="rfl", path="rfl_example.csv",
                                        params={"B": 2, "constraints": ["order"]}))
    assert loaded.rfl.N == 12 and len(loaded.problem.X.halfspaces) == 1

    path = get_instance_mapper().save(toy_library()["saddle"], tmp_path / "saddle.json")
    again = load_instance(InstanceSpec(source="json", path=str(path))).problem
    assert objective(again, np.array([-2.5, 0.0])) == pytest.approx(0.75)
    with pytest.raises(ConfigException):
        load_instance(InstanceSpec(name="nope"))
