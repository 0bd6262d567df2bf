import numpy as np
import pytest

from geodev.scenarios import ScenarioSpec, build


@pytest.fixture(scope="session")
def sphere():
    return build(ScenarioSpec("sphere"))


@pytest.fixture(scope="session")
def sphere_accel():
    return build(ScenarioSpec("sphere", {"accel": 0.3}))


@pytest.fixture(scope="session")
def flat_torsion():
    return build(ScenarioSpec("flat-torsion"))


@pytest.fixture(scope="session")
def flat_ruled():
    return build(ScenarioSpec("flat-euclidean/ruled"))


@pytest.fixture(scope="session")
def flat_quadratic():
    return build(ScenarioSpec("flat-euclidean/quadratic"))


@pytest.fixture(scope="session")
def offset_transport():
    return build(ScenarioSpec("offset-transport"))


@pytest.fixture(scope="session")
def minkowski():
    return build(ScenarioSpec("minkowski"))


@pytest.fixture(scope="session")
def exp_transport():
    return build(ScenarioSpec("exp-transport"))


@pytest.fixture
def rng():
    return np.random.default_rng(20260808)
