import pytest

from superkraw.params import binary_paramset, random_paramset


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[k])


@pytest.fixture
def binary():
    return binary_paramset()


@pytest.fixture(params=[(1, 1, 0), (2, 1, 3), (1, 2, 5), (2, 2, 8)], ids=lambda t: "m%d-n%d-s%d" % t)
def random_ps(request):
    return random_paramset(*request.param)
