import numpy as np
import pytest

from emoppg import models


@pytest.fixture(scope="session")
def blob_dataset():
    """Three overlapping Gaussian blobs in 5-D, 300 rows."""
    rng = np.random.default_rng(7)
    X = np.vstack([rng.normal(m, 1.0, (100, 5)) for m in (0.0, 2.0, 4.0)])
    y = np.repeat([0, 1, 2], 100)
    return X, y


@pytest.fixture(scope="session")
def separable_dataset():
    """Three well-separated clusters; every sane model hits accuracy 1."""
    rng = np.random.default_rng(11)
    X = np.vstack([rng.normal(m, 0.3, (60, 4)) for m in (-10.0, 0.0, 10.0)])
    y = np.repeat([0, 1, 2], 60)
    return X, y


@pytest.fixture(scope="session")
def small_forest(blob_dataset):
    X, y = blob_dataset
    return models.train_random_forest(X, y, n_trees=25, seed=3)


@pytest.fixture(scope="session")
def small_extra_trees(blob_dataset):
    X, y = blob_dataset
    return models.train_extra_trees(X, y, n_trees=25, seed=3)


@pytest.fixture(scope="session")
def small_gbt(blob_dataset):
    X, y = blob_dataset
    return models.train_gradient_boosted(X, y, rounds=15)
