import math

import pytest

from catwatt.params import Level, OperatingPoint, default_config


@pytest.fixture(scope="session")
def cfg():
    return default_config()


@pytest.fixture
def op():
    """alpha=3, kappa2 = 1000 kappa1, eps_z/2pi = 1 MHz, g/2pi = 1 MHz."""
    return OperatingPoint(3.0, 1000.0, 2 * math.pi * 1e6, 2 * math.pi * 1e6, Level.MACRO)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def report():
    def record(criterion: str, ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'} [{criterion}] {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
