import pytest

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def criterion():
    """Record one acceptance criterion outcome and fail the test if it did not hold."""

    def check(number, name, passed, detail=""):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {name}  ({detail})"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert passed, line

    return check


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
