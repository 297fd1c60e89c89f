import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cherrywine import Dataset, discretize, uniform_partition


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def make_dataset(values, names=None):
    values = np.asarray(values, dtype=float)
    if names is None:
        names = tuple(f"x{i + 1}" for i in range(values.shape[1]))
    return Dataset(values, names)


def discretized(values, m):
    data = make_dataset(values)
    return discretize(data, uniform_partition(data, m))


@pytest.fixture
def hub_tree():
    """The 6-variable order-3 tree used throughout the worked examples."""
    from cherrywine import tcherry_from_junction

    return tcherry_from_junction(
        [(1, 2, 3), (2, 3, 4), (2, 3, 6), (3, 4, 5)],
        [(0, 1), (1, 2), (1, 3)],
        3,
    )


FULL6_LEVELS = {
    1: {"1,2", "2,3", "2,6", "3,4", "4,5"},
    2: {"1,3|2", "3,6|2", "2,4|3", "3,5|4"},
    3: {"1,4|2,3", "4,6|2,3", "2,5|3,4"},
    4: {"1,5|2,3,4", "5,6|2,3,4"},
    5: {"1,6|2,3,4,5"},
}
