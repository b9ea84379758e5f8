"""Shared test plumbing.

Acceptance tests register one human-readable pass/fail line per
criterion via :func:`record_criterion`; the hook below prints them in
the terminal summary so the lines survive output capturing.
"""

CRITERION_LINES: list[str] = []


def record_criterion(name: str, ok: bool, detail: str) -> None:
    status = "PASS" if ok else "FAIL"
    CRITERION_LINES.append(f"{status}  {name}: {detail}")
    assert ok, f"{name}: {detail}"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in CRITERION_LINES:
            terminalreporter.write_line(line)
