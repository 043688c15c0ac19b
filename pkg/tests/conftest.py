import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from credit_pricer.market import MarketConfig, simulate_market  # noqa: E402


@pytest.fixture(scope="session")
def small_market():
    """A 3,000-row logistic market shared by the fast tests."""
    return simulate_market(MarketConfig(n_applications=3000, seed=11))


@pytest.fixture(scope="session")
def small_data(small_market):
    return small_market[0]


@pytest.fixture(scope="session")
def small_truth(small_market):
    return small_market[1]


def pytest_terminal_summary(terminalreporter):
    """One line per acceptance criterion, in the order the tests ran."""
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            if rep.when != "call":
                continue
            lines += [(rep.nodeid, v) for k, v in getattr(rep, "user_properties", []) if k == "criterion"]
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines, key=lambda t: t[1]):
            terminalreporter.write_line(line)
