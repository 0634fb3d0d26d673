"""Shared pytest plumbing for the test suite."""

# Verdict lines queued by the end-to-end gate in test_acceptance.py; printed
# as a summary section so they survive output capture.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance summary")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
