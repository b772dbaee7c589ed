import numpy as np
import pytest

from unidecon.kde import Sample
from unidecon.kernels import get_kernel
from unidecon.montecarlo import sample_convolution
from unidecon.rng import StreamRNG
from unidecon.theory import get_model


@pytest.fixture(scope="session")
def biweight():
    return get_kernel("biweight")


@pytest.fixture(scope="session")
def normal_sample():
    return sample_convolution(get_model("stdnormal"), 400, StreamRNG(11, 0))


@pytest.fixture
def point_sample():
    return Sample(np.array([0.5]))


_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def verdict():
    """Record and print one pass/fail line, then assert it."""
    def record(label, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
