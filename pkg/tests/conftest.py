import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ledleak import FrameFormat, channel_from_config, led_from_config

settings.register_profile(
    "repo",
    derandomize=True,
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")


@pytest.fixture(scope="session")
def fmt9600():
    return FrameFormat(bit_rate=9600.0)


@pytest.fixture(scope="session")
def led():
    return led_from_config()


@pytest.fixture(scope="session")
def dark5m():
    return channel_from_config(distance_m=5.0, ambient_name="dark_room")


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
