from __future__ import annotations

from collections import OrderedDict

_CRITERIA: "OrderedDict[int, str]" = OrderedDict()
_NODE_TO_CRITERION: dict[str, int] = {}
_FAILED: set[int] = set()
_SEEN: set[int] = set()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, description): acceptance criterion this test establishes")


def pytest_collection_modifyitems(session, config, items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is None:
            continue
        n, desc = mark.args
        _CRITERIA.setdefault(n, desc)
        _NODE_TO_CRITERION[item.nodeid] = n


def pytest_runtest_logreport(report):
    n = _NODE_TO_CRITERION.get(report.nodeid)
    if n is None:
        return
    if report.when == "call" or report.failed:
        _SEEN.add(n)
    if report.failed:
        _FAILED.add(n)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        if n not in _SEEN:
            status = "SKIP"
        else:
            status = "FAIL" if n in _FAILED else "PASS"
        terminalreporter.write_line(f"AC{n:02d} {status} {_CRITERIA[n]}")
