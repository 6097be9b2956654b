"""Shared fixtures."""

import numpy as np
import pytest

from csiratio.signal_model import Path, PathSet, SystemConfig, generate_offsets


@pytest.fixture
def config():
    return SystemConfig()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def single_path():
    return PathSet((Path(0.8 * np.exp(0.4j), 100.0, 0.12e-6, np.radians(30)),),
                   tuple(Path(np.exp(1j * k), 0.0, d, a)
                         for k, d, a in [(0.3, 0.05e-6, -0.6), (1.1, 0.21e-6, 0.2), (2.0, 0.33e-6, 0.9),
                                         (2.9, 0.08e-6, -1.2), (4.2, 0.37e-6, 0.5)]))


@pytest.fixture
def two_paths():
    return PathSet((Path(1.0 + 0j, -150.0, 0.1e-6, np.radians(-40)),
                    Path(0.9 * np.exp(1.3j), 200.0, 0.3e-6, np.radians(25))),
                   tuple(Path(np.exp(1j * k), 0.0, d, a)
                         for k, d, a in [(0.3, 0.05e-6, -0.6), (1.1, 0.21e-6, 0.2), (2.0, 0.33e-6, 0.9),
                                         (2.9, 0.08e-6, -1.2), (4.2, 0.37e-6, 0.5)]))


@pytest.fixture
def random_offsets(config):
    return generate_offsets("iid-uniform", config.packet_count, seed=99)


def pytest_terminal_summary(terminalreporter):
    from .helpers import ACCEPTANCE_REPORT

    if ACCEPTANCE_REPORT:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_REPORT):
            terminalreporter.write_line(ACCEPTANCE_REPORT[key])
