import os

import numpy as np
import pytest

from jostlab.potentials import (
    Exponential,
    Gaussian,
    SquareWell,
    Tabulated,
    Yukawa,
)

CONFIG_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "configs")


@pytest.fixture(scope="session")
def well():
    return SquareWell(depth=4.0, radius=1.0)


@pytest.fixture(scope="session")
def shallow_well():
    return SquareWell(depth=1.0, radius=1.0)


@pytest.fixture(scope="session")
def free():
    return SquareWell(depth=0.0, radius=1.0)


@pytest.fixture(scope="session")
def gauss():
    return Gaussian(strength=-2.0, width=1.0)


@pytest.fixture(scope="session")
def expwell():
    return Exponential(strength=-2.0, range_=1.0)


@pytest.fixture(scope="session")
def yukawa():
    return Yukawa(strength=-1.0, screening=1.0)


def make_wellbarrier():
    """Smoothed well (-4 for r<1) plus barrier (+6 for 1<r<1.5) profile."""
    def s(x, w=0.04):
        return 1.0 / (1.0 + np.exp(-x / w))

    r = np.round(np.arange(0.0, 2.401, 0.02), 10)
    V = -4.0 * s(1.0 - r) + 6.0 * s(r - 1.0) * s(1.5 - r)
    return Tabulated(np.column_stack([r, V]))


@pytest.fixture(scope="session")
def wellbarrier():
    return make_wellbarrier()


@pytest.fixture(scope="session")
def config_dir():
    return os.path.abspath(CONFIG_DIR)
