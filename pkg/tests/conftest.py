import pytest

from support import FANS

ACCEPTANCE: dict = {}


@pytest.fixture(params=FANS)
def fan_name(request):
    return request.param


@pytest.fixture
def record():
    """Record one acceptance criterion's outcome for the end-of-run summary."""
    def _record(number: int, ok: bool, detail: str) -> None:
        ACCEPTANCE[number] = (ok, detail)
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
