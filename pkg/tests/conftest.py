import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from distorted_premiums import DiscreteLoss
from distorted_premiums.battery import battery

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def two_point():
    """The {(0, 0.9), (100, 0.1)} loss used by many hand-checked examples."""
    return DiscreteLoss([0.0, 100.0], [0.9, 0.1])


@pytest.fixture(scope="session")
def full_battery():
    return battery()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
