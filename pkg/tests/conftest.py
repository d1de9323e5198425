"""Shared test-run plumbing.

The acceptance tests register one line per criterion here; the hook
prints them as a scorecard after the run summary, where pytest's
output capture cannot swallow them.
"""

acceptance_lines: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if acceptance_lines:
        terminalreporter.section("acceptance scorecard")
        for line in acceptance_lines:
            terminalreporter.write_line(line)
