import pytest

from chainmark.imagecore import BinaryImage

FIXTURE_COLUMNS = ["111110", "000000", "110011", "111111", "100000", "111100"]

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(cid, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    cid, title = marker.args
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        _criteria[cid] = (title, "PASS" if rep.passed else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_criteria, key=lambda c: int(c[1:])):
        title, status = _criteria[cid]
        terminalreporter.write_line(f"{cid:>4} {status}  {title}")


@pytest.fixture
def six_by_six():
    return BinaryImage.from_columns(FIXTURE_COLUMNS)
