import pytest

from colombeau.grid import EpsilonGrid
from colombeau.smooth import Mollifier


@pytest.fixture(scope="session")
def grid():
    return EpsilonGrid.default()


@pytest.fixture(scope="session")
def mol_q4():
    return Mollifier(Q=4, R=1.0)


@pytest.fixture(scope="session")
def mol_q0():
    return Mollifier(Q=0, R=1.0)
