import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_CRITERIA = {}


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion."""
    def report(number, ok, detail):
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}: {detail}"
        _CRITERIA[number] = line
        print(line)
        return ok
    return report


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[n])
