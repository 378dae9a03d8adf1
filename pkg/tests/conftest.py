import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from rbnedit import prng

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def root():
    return prng.root(20240611)


def bits_of(value: int, width: int) -> np.ndarray:
    return np.array([(value >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.uint8)
