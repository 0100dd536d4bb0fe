"""tests/conftest.py for multibell."""

import pytest

from multibell.experiment import SourceConfig
from multibell.qstate import SINGLET, TABLE_I_STATE

from tests.helpers import random_physical_state


@pytest.fixture(scope="session")
def table_i_state():
    return TABLE_I_STATE


@pytest.fixture(scope="session")
def singlet():
    return SINGLET


@pytest.fixture(scope="session")
def source_config():
    """Source settings of the reference experiment: 4.2 kHz, 20 s per polarizer pair."""
    return SourceConfig(pair_rate=4200.0, duration=20.0, seed=1)


@pytest.fixture(scope="session")
def random_states():
    """20 random physical states, fixed across runs."""
    return [random_physical_state(seed) for seed in range(20)]
