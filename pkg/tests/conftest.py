import pytest
from hypothesis import HealthCheck, settings

from soalab.classes import Universe
from soalab.fpmod import FpModule, Ring, morphism

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def R4():
    return Ring.Zmod(4)


@pytest.fixture(scope="session")
def Z2(R4):
    return FpModule.cyclic(R4, 2)


@pytest.fixture(scope="session")
def Z4(R4):
    return FpModule.cyclic(R4, 4)


@pytest.fixture(scope="session")
def double(Z2, Z4):
    """The inclusion Z/2 -> Z/4, 1 |-> 2."""
    return morphism(Z2, Z4, [[2]])


@pytest.fixture(scope="session")
def quotient(Z4, Z2):
    """The projection Z/4 -> Z/2."""
    return morphism(Z4, Z2, [[1]])


@pytest.fixture(scope="session")
def U8(R4):
    return Universe.of(R4, 8)


@pytest.fixture(scope="session")
def U16(R4):
    return Universe.of(R4, 16)
