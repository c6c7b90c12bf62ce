import time
from contextlib import contextmanager

# (number, title, passed, seconds, limit) for each acceptance criterion run
CRITERIA: list = []


@contextmanager
def criterion(number: int, title: str, limit: float):
    """Time a criterion body, record one result line and fail on overrun."""
    t0 = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        dt = time.perf_counter() - t0
        passed = ok and dt < limit
        CRITERIA.append((number, title, passed, dt, limit))
        line = f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {dt:7.1f}s / {limit:.0f}s  {title}"
        print(line)
    assert dt < limit, f"criterion {number} took {dt:.1f}s, limit {limit:.0f}s"


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, dt, limit in sorted(CRITERIA, key=lambda c: c[0]):
        terminalreporter.write_line(
            f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {dt:7.1f}s / {limit:.0f}s  {title}")
