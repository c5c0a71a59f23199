import numpy as np
import pytest

from circlelab.circle_map import make_map
from circlelab.measures import invariant_density


@pytest.fixture(scope="session")
def trig():
    return make_map("trig:d=2,eps=0.5")


@pytest.fixture(scope="session")
def pl():
    return make_map("pl:s=0.3")


@pytest.fixture(scope="session")
def trig_density(trig):
    return invariant_density(trig)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
