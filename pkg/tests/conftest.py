import pytest

_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Call with ``(label, passed, detail)``; the line is echoed immediately
    and again in the terminal summary."""

    def record(label: str, passed: bool, detail: str = "") -> None:
        line = f"{'PASS' if passed else 'FAIL'} {label}: {detail}"
        _LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
