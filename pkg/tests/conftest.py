import pytest

_LOG = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LOG] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line and assert it."""
    log = request.config.stash[_LOG]

    def record(label, passed, detail=""):
        line = f"{'PASS' if passed else 'FAIL'}  criterion {label:<4} {detail}".rstrip()
        log.append(line)
        print(line)
        assert passed, line

    return record


def pytest_terminal_summary(terminalreporter, config):
    log = config.stash.get(_LOG, [])
    if log:
        terminalreporter.section("acceptance criteria")
        for line in log:
            terminalreporter.write_line(line)
