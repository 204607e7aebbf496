import numpy as np
import pytest

from snf import kernels


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=sorted(kernels.available_backends()))
def backend(request):
    return kernels.available_backends()[request.param]


class AcceptanceLog:
    """Collects one verdict line per acceptance criterion."""

    def __init__(self):
        self.lines = []

    def record(self, criterion, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
        self.lines.append(line)
        print(line)
        return ok


_ACCEPTANCE = AcceptanceLog()


@pytest.fixture
def acceptance_log():
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE.lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE.lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
