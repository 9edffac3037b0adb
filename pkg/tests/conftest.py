import numpy as np
import pytest

from uavenergy.config import load_models
from uavenergy.linear import hover_set_point


@pytest.fixture(scope="session")
def models():
    """Holybro S500 V2 fixture shipped with the package."""
    return load_models("holybro_s500")


@pytest.fixture(scope="session")
def vp(models):
    return models.vehicle


@pytest.fixture(scope="session")
def bp(models):
    return models.battery


@pytest.fixture(scope="session")
def bp_pw(models):
    return models.battery_piecewise


@pytest.fixture(scope="session")
def mp(models):
    return models.motor


@pytest.fixture(scope="session")
def etl(models):
    return models.etl


@pytest.fixture(scope="session")
def set_point(vp, bp, mp):
    return hover_set_point(vp, bp, mp)


@pytest.fixture(scope="session")
def hover_speeds(vp, set_point):
    return np.full(vp.n_motors, set_point.motor_speed)
