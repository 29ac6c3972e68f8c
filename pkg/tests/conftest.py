import numpy as np
import pytest

from condent.data import Dataset


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def hand4():
    """Four collinear points, alternating labels; k=2 gives H = (log 2)/4."""
    return Dataset(features=np.array([[0.0], [1.0], [2.5], [10.0]]),
                   labels=np.array([0, 1, 0, 1]), m=2, label_names=("a", "b"))


def random_dataset(rng, n, d, m):
    return Dataset(features=rng.normal(size=(n, d)),
                   labels=rng.integers(0, m, size=n), m=m)
