import pytest

from mixroute.instances import THREE_ROAD_DEMAND, two_road_network, three_road_network
from mixroute.model import Demand, FlowProfile

KNOWN_WORST = FlowProfile.from_pairs([(1.125, 0.0), (1.5, 1.0), (0.0, 1.5)])
ROUNDED_OPT = FlowProfile.from_pairs([(0.0, 1.65), (0.37, 0.85), (2.26, 0.0)])

_criteria = {}


@pytest.fixture
def three_road():
    return three_road_network()


@pytest.fixture
def three_road_demand():
    return THREE_ROAD_DEMAND


@pytest.fixture
def two_road_k2():
    return two_road_network(2.0)


@pytest.fixture
def unit_demand():
    return Demand(1.0, 1.0)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None and (rep.when == "call" or rep.failed):
        label = marker.args[0]
        _criteria[label] = _criteria.get(label, True) and rep.passed


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion this test checks")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_criteria):
        status = "PASS" if _criteria[label] else "FAIL"
        terminalreporter.write_line(f"{status}  {label}")
