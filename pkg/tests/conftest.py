import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

_CRITERIA = {}


@pytest.fixture
def criterion():
    """Record one acceptance line; ``record(n, ok, detail)`` may be called repeatedly per criterion."""
    def record(n, ok, detail):
        prev = _CRITERIA.get(n)
        if prev is None:
            _CRITERIA[n] = [bool(ok), [detail]]
        else:
            prev[0] = prev[0] and bool(ok)
            prev[1].append(detail)
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, details = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'} | "
                                    + "; ".join(details))
