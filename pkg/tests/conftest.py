import numpy as np
import pytest

from neumann_patterns.domain import build_mask


@pytest.fixture(scope="session")
def square32():
    return build_mask("rectangle", 1 / 32)


@pytest.fixture(scope="session")
def lshape16():
    return build_mask("lshape", 1 / 16)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# acceptance verdicts, one line per criterion in the terminal summary
_VERDICTS = {}


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None or call.when not in ("setup", "call"):
        return
    number, title = mark.args
    failed = call.excinfo is not None and not call.excinfo.errisinstance(pytest.skip.Exception)
    if failed or call.when == "call":
        _VERDICTS[number] = (title, "FAIL" if failed else "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_VERDICTS):
        title, verdict = _VERDICTS[number]
        terminalreporter.write_line(f"criterion {number:>2} {verdict}: {title}")
