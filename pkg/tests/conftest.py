import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

_results = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    props = dict(report.user_properties)
    label = props.get("criterion")
    if label is None:
        return
    if report.when == "call" or report.failed:
        prev = _results.get(label)
        ok = report.passed and (prev is None or prev[0])
        details = ([prev[1]] if prev and prev[1] else []) + ([props["detail"]] if "detail" in props else [])
        _results[label] = (ok, "; ".join(details))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_results):
        ok, detail = _results[label]
        line = f"{'PASS' if ok else 'FAIL'}  {label}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
