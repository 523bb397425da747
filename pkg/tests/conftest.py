import contextlib
import time

import pytest

from imcrypto.controller import Machine

_RESULTS = {}


@pytest.fixture(scope="module")
def machine():
    """One loaded fabric reused across a module; runs do not depend on prior state."""
    return Machine()


@pytest.fixture
def criterion():
    """``with criterion(n, title): ...`` records a PASS/FAIL line for criterion n."""

    @contextlib.contextmanager
    def check(number, title):
        start = time.perf_counter()
        try:
            yield
        except BaseException as exc:
            _RESULTS[number] = ("FAIL", title, f"{type(exc).__name__}: {exc}".splitlines()[0][:160])
            print(f"criterion {number}: FAIL  {title}")
            raise
        took = time.perf_counter() - start
        _RESULTS[number] = ("PASS", title, f"{took:.1f}s")
        print(f"criterion {number}: PASS  {title} ({took:.1f}s)")

    return check


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        status, title, detail = _RESULTS[n]
        terminalreporter.write_line(f"criterion {n}: {status}  {title}  [{detail}]")
