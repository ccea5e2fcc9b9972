import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from delone import fixtures  # noqa: E402

ROOT = Path(__file__).resolve().parents[1]
SPECS = ROOT / "specs"

# acceptance criterion id -> (title, outcome)
ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(cid, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    cid, title = mark.args
    prev = ACCEPTANCE.get(cid, (title, True))[1]
    ACCEPTANCE[cid] = (title, prev and rep.passed)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE):
        title, ok = ACCEPTANCE[cid]
        tr.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {cid}: {title}")


@pytest.fixture(params=sorted(fixtures.FIXTURES))
def any_system(request):
    return request.param, fixtures.get(request.param)


@pytest.fixture
def spec_dir():
    return SPECS
