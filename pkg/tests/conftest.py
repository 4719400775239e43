import numpy as np
import pytest

from fairclust import DemographicPartition


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(1234))


def random_simplex_rows(rng, n_rows, n_cols, alpha=1.0):
    return rng.dirichlet(np.full(n_cols, alpha), size=n_rows)


@pytest.fixture
def six_point_instance():
    """2-D instance with soft assignments used by several derived oracles."""
    features = np.array([
        [0.0, 0.0], [1.0, 0.2], [0.1, 1.0],
        [3.0, 2.9], [2.8, 3.1], [3.2, 3.0],
    ])
    soft = np.array([
        [0.9, 0.1], [0.8, 0.2], [0.7, 0.3],
        [0.2, 0.8], [0.1, 0.9], [0.3, 0.7],
    ])
    demo = DemographicPartition.from_group_labels(
        np.array([0, 1, 0, 1, 0, 1]), targets=[0.5, 0.5])
    return features, soft, demo
