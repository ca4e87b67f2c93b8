import pytest

#: Lines recorded by the acceptance suite, printed at the end of the session.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def record_criterion():
    """Prints and records a pass/fail line, then fails the test if needed."""

    def record(number: int, name: str, ok: bool, detail: str = "") -> None:
        line = "criterion {0} [{1}] {2}{3}".format(
            number, "PASS" if ok else "FAIL", name,
            ": " + detail if detail else "")
        print(line)
        ACCEPTANCE_LINES.append(line)
        assert ok, line

    return record
