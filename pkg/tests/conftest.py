import pytest

ACCEPTANCE = []


@pytest.fixture
def criterion(request):
    """Record a named acceptance check; the verdict is printed in the summary."""

    def record(number: int, title: str, passed: bool, detail: str = ""):
        ACCEPTANCE.append((number, title, passed, detail))
        assert passed, f"criterion {number} ({title}) failed: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE):
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{verdict}] {number:>2}. {title}: {detail}")
