import time

import pytest

from cograph.config import PRESETS, preset_config
from cograph.scenarios import execute

_CRITERIA = {}


class PresetRuns:
    """Runs each preset once per session and remembers its wall time."""

    def __init__(self):
        self.results, self.seconds = {}, {}

    def __getitem__(self, name):
        if name not in self.results:
            start = time.perf_counter()
            self.results[name] = execute(preset_config(name))
            self.seconds[name] = time.perf_counter() - start
        return self.results[name]

    def all(self):
        return {name: self[name] for name in PRESETS}


@pytest.fixture(scope="session")
def runs():
    return PresetRuns()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None or call.when == "teardown" or (call.when == "setup" and call.excinfo is None):
        return
    number, title = mark.args
    ok = call.excinfo is None
    prev = _CRITERIA.get(number, (title, True))
    _CRITERIA[number] = (title, prev[1] and ok)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {title}")
