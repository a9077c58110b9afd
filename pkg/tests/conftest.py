import numpy as np
import pytest

from spherefit import experiments


@pytest.fixture(scope="session")
def t3_design():
    return experiments.load_design(3)


@pytest.fixture(scope="session")
def t11_design():
    return experiments.load_design(11)


@pytest.fixture(scope="session")
def t15_design():
    return experiments.load_design(15)


@pytest.fixture(scope="session")
def t19_design():
    return experiments.load_design(19)


@pytest.fixture(scope="session")
def t47_design():
    return experiments.load_design(47)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)


def random_unit_vectors(rng, n):
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)
