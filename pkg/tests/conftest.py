import pytest

from riskrank.ontology import Ontology
from riskrank.simharness.scenario import default_scenario


@pytest.fixture
def small_tree():
    # root -> A -> {B, C}
    return Ontology.from_edges("Location", "root", [("root", "A"), ("A", "B"), ("A", "C")])


@pytest.fixture(scope="session")
def scenario():
    return default_scenario()


@pytest.fixture(scope="session")
def ontologies(scenario):
    return scenario.ontologies


def pytest_terminal_summary(terminalreporter):
    import sys
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
