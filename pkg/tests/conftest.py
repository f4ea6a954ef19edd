import pytest

_RESULTS = {}


class Recorder:
    def __init__(self, number, title):
        self.number, self.title = number, title

    def check(self, ok, detail):
        _RESULTS[self.number] = (self.title, bool(ok), detail)
        assert ok, f"criterion {self.number} ({self.title}): {detail}"


@pytest.fixture
def criterion(request):
    def make(number, title):
        return Recorder(number, title)
    return make


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        title, ok, detail = _RESULTS[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} [{n:2d}] {title}: {detail}")
