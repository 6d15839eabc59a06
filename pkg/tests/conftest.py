import math

import pytest

from ecover.metric import euclidean_space, matrix_space, scale_graph


@pytest.fixture(scope="session")
def square():
    return euclidean_space([(0, 0), (1, 0), (1, 1), (0, 1)])


@pytest.fixture(scope="session")
def cycle4(square):
    """The 4-cycle: unit square at a scale between side and diagonal."""
    return scale_graph(square, 1.2)


@pytest.fixture(scope="session")
def k4(square):
    return scale_graph(square, 1.5)


@pytest.fixture(scope="session")
def hexagon():
    return euclidean_space([(math.cos(k * math.pi / 3), math.sin(k * math.pi / 3)) for k in range(6)])


@pytest.fixture(scope="session")
def point():
    return matrix_space([[0.0]])
