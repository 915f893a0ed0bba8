import numpy as np
import pytest

from sphere_edgelab import boundary_curve, demo_region


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture(scope="session")
def wiggly_region():
    return demo_region()


@pytest.fixture(scope="session")
def wiggly_curve(wiggly_region):
    return boundary_curve(wiggly_region)
