import pytest

from singmin.geometry import ShapeSpec, make_domain
from singmin.plap_solver import SolverConfig


@pytest.fixture(scope="session")
def cfg():
    return SolverConfig()


@pytest.fixture(scope="session")
def cfg_single():
    # single-start config for tests that do not exercise multistart agreement
    return SolverConfig(multistart=1)


@pytest.fixture(scope="session")
def disk24():
    return make_domain(ShapeSpec.disk(1.0, 24))


@pytest.fixture(scope="session")
def disk48():
    return make_domain(ShapeSpec.disk(1.0, 48))


@pytest.fixture(scope="session")
def disk64():
    return make_domain(ShapeSpec.disk(1.0, 64))


@pytest.fixture(scope="session")
def disk128():
    return make_domain(ShapeSpec.disk(1.0, 128))


@pytest.fixture(scope="session")
def square64():
    return make_domain(ShapeSpec.rect(1.0, 1.0, 64))


@pytest.fixture(scope="session")
def square128():
    return make_domain(ShapeSpec.rect(1.0, 1.0, 128))
