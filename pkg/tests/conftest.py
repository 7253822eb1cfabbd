import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one acceptance line, then assert it."""

    def check(cid: str, ok: bool, detail: str) -> None:
        _LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {cid}: {detail}")
        assert ok, f"criterion {cid}: {detail}"

    return check


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in _LINES:
        terminalreporter.write_line(line)
