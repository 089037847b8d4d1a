import re

_RESULTS = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", report.nodeid)
    if not m:
        return
    key = (int(m.group(1)), m.group(2).replace("_", " "))
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _RESULTS[key] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for (num, name), outcome in sorted(_RESULTS.items()):
        terminalreporter.write_line(f"criterion {num:2d} {name}: {'PASS' if outcome == 'passed' else 'FAIL'}")
