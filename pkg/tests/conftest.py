import numpy as np
import pytest

from beamrefine.array_geometry import ArrayConfig
from beamrefine.channel import UserState
from beamrefine.ofdm_link import OfdmConfig


@pytest.fixture
def array_cfg():
    return ArrayConfig(n_antennas=64, n_rf=4, beta=4 / 64)


@pytest.fixture
def ofdm_cfg():
    return OfdmConfig()


@pytest.fixture
def user():
    return UserState(aod=np.radians(10.7), range=40.0, speed=20.0, rcs=100.0, tx_phase=0.3, bs_phase=1.1)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_CRITERIA = []


@pytest.fixture
def criterion():
    """Record a one-line verdict; the lines are echoed in the terminal summary."""

    def record(label, ok, detail):
        _CRITERIA.append(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
