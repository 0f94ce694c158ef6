import numpy as np
import pytest

from app.services.problems import fully_active, kink_instance, saddle_instance, two_clip_instance, valley_instance


@pytest.fixture
def kink():
    return kink_instance()


@pytest.fixture
def two_clip():
    return two_clip_instance()


@pytest.fixture
def saddle():
    return saddle_instance()


@pytest.fixture
def valley():
    return valley_instance()


@pytest.fixture
def fully_active_2x3():
    # h̄ = ½‖x‖², X = [-4, 1]², F* = -0.25 于 (-0.5, -0.5)
    from app.model.entity.atoms import Quadratic
    from app.model.entity.feasible import Box
    return fully_active(2, [2, 3], 2, hbar=Quadratic(P=np.eye(2), a=np.zeros(2), b=0.0),
                        box=Box.uniform(2, -4.0, 1.0))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
