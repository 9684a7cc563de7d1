import pytest

from src.core.exact import ONE
from src.core.hochschild import Cochain
from src.core.sampling import B2, B3, E1, E2, dual_numbers_2


@pytest.fixture
def e1():
    return E1()


@pytest.fixture
def e2():
    return E2()


@pytest.fixture
def b2():
    return B2()


@pytest.fixture
def b3():
    return B3()


@pytest.fixture
def dual2():
    return dual_numbers_2()


def x_eps(alg, base):
    """ beta(x, x) = x (x) eps. """
    return Cochain(2, alg.dim, base, {(0, 0): {(0, 1): ONE}}, m_only=True)


def minus_2y_eps(alg, base):
    """ beta(x, x) = -2 y (x) eps over E2. """
    return Cochain(2, alg.dim, base, {(0, 0): {(1, 1): -2 * ONE}}, m_only=True)
