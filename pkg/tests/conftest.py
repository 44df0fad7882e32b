import numpy as np
import pytest

from stochgate.statevec import StateVector, random_state

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def data_states(rng):
    return [random_state(1, rng) for _ in range(5)]


def ket(*amps) -> StateVector:
    return StateVector(np.array(amps, dtype=complex))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
