import pytest

_results = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    name = mark.args[0]
    prev = _results.get(name, True)
    if rep.when == "call":
        _results[name] = prev and rep.passed
    elif rep.failed:
        _results[name] = False


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok in _results.items():
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}")
