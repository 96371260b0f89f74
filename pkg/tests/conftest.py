"""Prints one PASS/FAIL line per acceptance criterion at the end of the run."""

_acceptance_outcomes: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.rsplit("::", 1)[-1]
    outcome = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
    _acceptance_outcomes.append((name, outcome))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance_outcomes:
        terminalreporter.write_line(f"{outcome}  {name}")
