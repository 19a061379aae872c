import numpy as np
import pytest

from qmeans.wellcluster import generate_well_clusterable


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_wc():
    """Three well-separated clusters in 5-d, min-norm normalised."""
    return generate_well_clusterable(3, 5, 300, 0.2, 10.0, seed=7)


ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line; the outcome is read from the test report."""

    def note(number, text):
        ACCEPTANCE[request.node.nodeid] = [number, text, None]

    return note


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    entry = ACCEPTANCE.get(item.nodeid)
    if entry is None or rep.when not in ("setup", "call"):
        return
    if rep.skipped:
        entry[2] = "SKIP"
    elif rep.when == "call" or rep.failed:
        entry[2] = "PASS" if rep.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, text, status in sorted(ACCEPTANCE.values()):
        terminalreporter.write_line(f"{status or 'SKIP'} criterion {number}: {text}")
