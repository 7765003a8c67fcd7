import math

import numpy as np
import pytest

from ifgi.sample import synthesize


def matrix_transfer(M, gamma0, gamma1):
    """Independent oracle: 2x2 transfer-matrix products for both pixel classes.

    Returns (chi_p0, chi_p1, chi_b0, chi_b1, absorbed amplitudes).
    """
    t = math.pi / (2 * M)
    rot = np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])
    mirrors = np.diag([math.sqrt(1 - gamma0), math.sqrt(1 - gamma1)])
    clear = np.linalg.matrix_power(mirrors @ rot, M) @ np.array([1.0, 0.0])
    v = np.array([1.0, 0.0])
    absorbed = []
    for _ in range(M):
        v = rot @ v
        absorbed.append(v[1])
        v = mirrors @ np.diag([1.0, 0.0]) @ v
    return clear[0], clear[1], v[0], v[1], np.array(absorbed)


@pytest.fixture(scope="session")
def checker32():
    return synthesize("checkerboard", 32, 32)


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """Record one acceptance line (printed now and in the terminal summary), then assert it."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def record(number, title, ok, detail):
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}: {title} [{detail}]"
        lines.append((number, line))
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
