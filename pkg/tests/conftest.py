"""Shared pytest plumbing: collects one-line acceptance verdicts and prints
them in the terminal summary (outside output capture)."""

ACCEPTANCE_LINES: list = []


def record_verdict(criterion: str, passed: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(
        f"{criterion}: {'PASS' if passed else 'FAIL'} — {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
