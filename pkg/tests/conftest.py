import pytest

from jangbench.geometry import synthetic_data
from jangbench.schwarzschild import schwarzschild_data, schwarzschild_grid


@pytest.fixture(scope="session")
def schw_inv_r():
    return schwarzschild_data(1.0, "inv_r", r_out=100.0)


@pytest.fixture(scope="session")
def schw_zero():
    return schwarzschild_data(1.0, "zero", r_out=100.0)


@pytest.fixture(scope="session")
def schw_grid(schw_inv_r):
    return schwarzschild_grid(schw_inv_r, 2000)


@pytest.fixture(scope="session")
def syn13():
    return synthetic_data(1.0, 3.0, 1.0)


class _Criterion:
    def __init__(self, sink, number, title):
        self.sink, self.number, self.title, self.detail = sink, number, title, ""

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        status = "PASS" if exc_type is None else "FAIL"
        extra = self.detail if exc_type is None else f"{self.detail} {exc_type.__name__}: {exc}".strip()
        line = f"criterion {self.number} {status}: {self.title}" + (f" ({extra})" if extra else "")
        self.sink.append((self.number, line.splitlines()[0]))
        print(line.splitlines()[0])
        return False


@pytest.fixture
def criterion(request):
    sink = request.config.stash.setdefault(_LINES, [])
    return lambda number, title: _Criterion(sink, number, title)


_LINES = pytest.StashKey()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
