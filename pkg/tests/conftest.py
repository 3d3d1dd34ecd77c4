import pytest

from inhomog.carpet import carpet_from_counts, new_carpet
from inhomog.measure import column_uniform, max_entropy


@pytest.fixture
def c322():
    return carpet_from_counts(3, 4, (3, 2, 2))


@pytest.fixture
def c331():
    return carpet_from_counts(3, 4, (3, 3, 1))


@pytest.fixture
def c411():
    return carpet_from_counts(3, 4, (4, 1, 1))


@pytest.fixture
def left23():
    """m=2, n=3 carpet with column counts (2, 1)."""
    return new_carpet(2, 3, [(0, 0), (0, 2), (1, 1)])


@pytest.fixture
def mu322(c322):
    return column_uniform(c322)


@pytest.fixture
def mu_left(left23):
    return max_entropy(left23)
