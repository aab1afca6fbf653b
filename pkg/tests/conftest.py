import numpy as np
import pytest

from vibrosim.params import StringConfig


@pytest.fixture
def small_string():
    """A short, coarse string that runs in milliseconds."""
    return StringConfig(length_m=0.5, tension_n=50.0, linear_density=5.0e-4,
                        pluck_position_m=0.15, node_count=21, dt_s=2.0e-5, step_count=400)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
