import pytest

_ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Record the outcome of an acceptance criterion for the terminal summary."""
    label = request.node.get_closest_marker("criterion").args[0]
    _ACCEPTANCE[label] = None
    yield lambda detail: _ACCEPTANCE.__setitem__(label, detail)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion label")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    label = marker.args[0]
    passed = call.excinfo is None
    detail = _ACCEPTANCE.get(label) or ""
    if not passed:
        detail = str(call.excinfo.value).splitlines()[0] if call.excinfo.value.args else detail
    _ACCEPTANCE[label] = ("PASS" if passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    rows = [(k, v) for k, v in _ACCEPTANCE.items() if isinstance(v, tuple)]
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for label, (status, detail) in sorted(rows):
        terminalreporter.write_line(f"{status}  {label}  {detail}")
