import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from satsec.channel_gen import SystemConfig, draw_scenario, trial_rng

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def system():
    return SystemConfig()


@pytest.fixture(scope="session")
def noise(system):
    return system.link_budget.noise_model()


@pytest.fixture(scope="session")
def p_s(system):
    return system.link_budget.fl_power_w


@pytest.fixture
def channels(system):
    """A handful of default-config draws."""
    return [draw_scenario(trial_rng(7, i), system) for i in range(8)]


def cn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
