import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from entdetect.linalg import DensityMatrix

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=15,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def bell():
    v = np.zeros(4)
    v[0] = v[3] = 1 / np.sqrt(2)
    return DensityMatrix.from_vector(v, (2, 2))


def maxcorr_2x2(p0, p1):
    """``sum_ij theta_ij |ii><jj|`` with ``theta = [[1/2, (p0-p1)/2], [(p0-p1)/2, 1/2]]``."""
    off = (p0 - p1) / 2
    m = np.zeros((4, 4))
    m[0, 0], m[3, 3] = 0.5, 0.5
    m[0, 3] = m[3, 0] = off
    return DensityMatrix(m, (2, 2))
