"""Shared pytest hooks.

The acceptance module registers one line per criterion here; the
terminal-summary hook replays them at the end of the run so they are
visible regardless of capture settings.
"""

criterion_lines = []


def pytest_terminal_summary(terminalreporter):
    if criterion_lines:
        terminalreporter.section("acceptance criteria")
        for line in criterion_lines:
            terminalreporter.write_line(line)
