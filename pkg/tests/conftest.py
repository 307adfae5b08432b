from pathlib import Path

import pytest

from bicneuron.dataset import load_csv

DATA = Path(__file__).parent / "data"


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def example_raw():
    return load_csv(DATA / "example_raw.csv", label_column="L", id_column="id")


@pytest.fixture
def example_norm():
    return load_csv(DATA / "example_norm.csv", label_column="L", id_column="id")


@pytest.fixture
def example_biclusters():
    return DATA / "example_biclusters.txt"


# one PASS/FAIL line per acceptance criterion, printed after the run
_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
        _CRITERIA[number] = (title, rep.outcome == "passed", detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok, detail = _CRITERIA[number]
        line = f"{'PASS' if ok else 'FAIL'}  {number}. {title}"
        terminalreporter.write_line(line + (f"  [{detail}]" if detail else ""))
