import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

_CRITERIA = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_CRITERIA] = []


@pytest.fixture
def criterion(request):
    """Record one pass/fail line per acceptance criterion."""
    lines = request.config.stash[_CRITERIA]

    def record(number, title, checks):
        ok = all(c.passed for c in checks)
        head = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title}"
        block = [head] + [f"    {c.line()}" for c in checks]
        lines.extend(block)
        print("\n".join(block))
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_CRITERIA, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture
def half_stop():
    """p = 1/2, q = 0, r = 1/2, s = 1: a = b = 1/2."""
    from erws import make_params
    return make_params(0.5, 0.0, 0.5, 1.0)
