import numpy as np
import pytest

from tts_emg.synthetic import synthetic_recording


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_recording():
    """Five classes, four channels, 100 Hz, ten repetitions."""
    return synthetic_recording(subject=1, n_classes=5, n_channels=4, movement_s=0.6, rest_s=0.5, seed=3)


_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by a test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    ok = rep.passed if rep.when == "call" else not rep.failed
    prev = _CRITERIA.get(number, (title, True))
    _CRITERIA[number] = (title, prev[1] and ok and not rep.skipped)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}")
