import numpy as np
import pytest

from dbwire.config import GatewayConfig


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)


@pytest.fixture
def cfg():
    return GatewayConfig()


@pytest.fixture
def small_camera_cfg():
    """Config with a small render so perception-heavy tests stay quick."""
    return GatewayConfig(cam_fx=80.0, cam_fy=80.0, cam_cx=80.0, cam_cy=60.0,
                         cam_width=160, cam_height=120)
