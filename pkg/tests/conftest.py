import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20230817)


def central_diff(f, x, h):
    return (f(x + h) - f(x - h)) / (2.0 * h)
