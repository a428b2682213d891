import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def brute_xcorr(a, b, lag):
    """Plain double loop, kept separate from the library on purpose."""
    total = 0
    for n in range(len(a)):
        m = n + lag
        if 0 <= m < len(b):
            total += int(a[n]) * int(b[m])
    return total


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
