"""Shared pytest hooks: a terminal section for the acceptance-criteria lines.

Acceptance tests append one "criterion N (...): PASS/FAIL" line each; printing
them from a terminal-summary hook keeps the lines visible even though pytest
captures per-test stdout.
"""

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
