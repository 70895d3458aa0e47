import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from resrelax import QuadratureConfig, ThermalOhmic, two_level_system


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def atom():
    return two_level_system(omega_0=1.0, g=1.0)


@pytest.fixture
def thermal_kernel():
    return ThermalOhmic(eta=0.5, omega_j=5.0, temperature=1.0)


@pytest.fixture
def cfg():
    return QuadratureConfig(omega_cutoff=40.0)
