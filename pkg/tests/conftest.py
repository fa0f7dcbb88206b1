import numpy as np
import pytest

from xyergodic.config import ExperimentConfig
from xyergodic.runner import classify_all, compute


@pytest.fixture
def rng():
    return np.random.default_rng(7)


def _dataset(geometry: str, **extra):
    return classify_all(compute(ExperimentConfig.from_mapping({"geometry": geometry, **extra})))


@pytest.fixture(scope="session")
def infinite_chain():
    return _dataset("infinite-chain")


@pytest.fixture(scope="session")
def ladder():
    return _dataset("ladder 2x4")


@pytest.fixture(scope="session")
def chain12():
    return _dataset("chain 12")


@pytest.fixture(scope="session")
def torus():
    return _dataset("torus 3x4")


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
