"""Collects the acceptance PASS/FAIL lines and prints them after the run."""

import pytest

_LINES: list[str] = []


@pytest.fixture
def verdict():
    """``verdict(label, ok, detail)`` records one criterion line and returns ``ok``."""

    def record(label: str, ok: bool, detail: str = "") -> bool:
        line = f"{'PASS' if ok else 'FAIL'} {label}" + (f": {detail}" if detail else "")
        _LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
