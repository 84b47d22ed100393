import numpy as np
import pytest

from ctwm.net import validate_and_normalize

REMARK_ROWS = [[0.4, 0.2, 0.4], [0.0, 1.0, 0.0], [0.3, 0.3, 0.4]]


@pytest.fixture
def remark_matrix():
    """Three-node network with maximal cohesive sets {1} and {0, 2}."""
    return validate_and_normalize(REMARK_ROWS)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
