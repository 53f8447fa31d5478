import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


_ACCEPTANCE = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(name): exit criterion reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _ACCEPTANCE.append((marker.args[0], report.outcome, report.duration))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, duration in _ACCEPTANCE:
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{status}] {name} ({duration:.2f} s)")
