import numpy as np
import pytest

from diracsim.cache import reference_cache
from diracsim.grid import PeriodicGrid
from diracsim.settings import get_settings


def pytest_addoption(parser):
    parser.addoption("--run-long", action="store_true", default=False, help="run full-scale experiments")


def pytest_configure(config):
    config.addinivalue_line("markers", "long: full-scale run, skipped unless --run-long is given")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-long"):
        return
    skip_long = pytest.mark.skip(reason="needs --run-long")
    for item in items:
        if "long" in item.keywords:
            item.add_marker(skip_long)


@pytest.fixture(autouse=True)
def fresh_settings():
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def grid_1d():
    return PeriodicGrid.uniform(1, -np.pi, np.pi, 32)


@pytest.fixture
def grid_2d():
    return PeriodicGrid.uniform(2, -np.pi, np.pi, 16)


@pytest.fixture
def clean_cache():
    reference_cache.clear()
    yield reference_cache
    reference_cache.clear()
