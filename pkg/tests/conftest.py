import pytest

_LINES: list[str] = []


@pytest.fixture
def criterion_log():
    def log(line: str) -> None:
        print(line)
        _LINES.append(line)
    return log


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
