import numpy as np
import pytest

from pccseg.engine import EngineConfig
from pccseg.synthetic import two_block_fixture


@pytest.fixture(scope="session")
def two_block():
    return two_block_fixture()


@pytest.fixture()
def fast_engine():
    """Small iteration budget for tests that only exercise plumbing."""
    return EngineConfig(max_ite=4_000, max_stop=2_000, seed=0)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240811)
