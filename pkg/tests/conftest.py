import pytest

ACCEPTANCE_LINES: dict = {}


def record(number: int, name: str, passed: bool, measured: float, threshold: str) -> None:
    status = "PASS" if passed else "FAIL"
    line = f"[{status}] criterion {number:>2d} {name:<32s} measured={measured:.3e}  required {threshold}"
    ACCEPTANCE_LINES[number] = line
    print(line)


@pytest.fixture
def recorder():
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
