import numpy as np
import pytest

from dlobezier.synthgen import generate, render


@pytest.fixture(scope="session")
def sine_shape():
    return generate("sine")


@pytest.fixture(scope="session")
def sine_render(sine_shape):
    return render(sine_shape)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
