import pytest

CRITERIA = []


@pytest.fixture
def criterion():
    """Record one acceptance line: criterion(number, [(label, ok, detail), ...]).

    The line is printed in the terminal summary; the test then fails if any part failed.
    """

    def record(number, parts):
        ok = all(p[1] for p in parts)
        detail = "; ".join(f"{label} {'ok' if good else 'FAILED'} ({info})" for label, good, info in parts)
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        CRITERIA.append((number, line))
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for _, line in sorted(CRITERIA):
        terminalreporter.write_line(line)
