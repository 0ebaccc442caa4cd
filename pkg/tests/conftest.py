import numpy as np
import pytest

import landrisk as lr


@pytest.fixture(scope="session")
def table():
    return lr.default_class_table()


@pytest.fixture(scope="session")
def cmap():
    return lr.default_colormap()


@pytest.fixture
def rng():
    return np.random.default_rng(20240514)
