import math

import hypothesis
import pytest

from sdmodel.engine import (
    EngineParams,
    ExogenousInputs,
    IndexConfig,
    LandAllocation,
    LandTransitionMatrix,
    SimulationState,
)
from sdmodel.kernel import PpflParams, ProductionParams
from sdmodel.scenario import default_scenario

hypothesis.settings.register_profile("ci", deadline=None, max_examples=100)
hypothesis.settings.load_profile("ci")


@pytest.fixture
def scenario():
    return default_scenario()


def make_params(**overrides):
    base = dict(
        inflow=PpflParams(a0=math.log(2.0)),
        outflow=PpflParams(),
        production=ProductionParams(1.0, 0.3, 0.4),
        labor_share=0.5,
        savings_rate=0.2,
        depreciation_rate=0.05,
        resource_use_per_output=0.0,
        land_transitions=LandTransitionMatrix({}),
        dt=1.0,
    )
    base.update(overrides)
    return EngineParams(**base)


def make_state(**overrides):
    base = dict(
        time=2000.0,
        population=1000.0,
        capital=500.0,
        land=LandAllocation({"forest": 40.0, "agricultural": 50.0, "unused": 5.0,
                             "urban_industrial": 30.0}, ("forest",)),
        resource_stock=100.0,
    )
    base.update(overrides)
    return SimulationState(**base)


@pytest.fixture
def params():
    return make_params()


@pytest.fixture
def state():
    return make_state()


@pytest.fixture
def index_config():
    return IndexConfig(resource_reference=100.0)


@pytest.fixture
def exogenous():
    return ExogenousInputs()


# -- acceptance summary ------------------------------------------------------
# One PASS/FAIL line per acceptance criterion, printed after the test run.

_acceptance_outcomes: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call" or report.outcome == "failed":
        prev = _acceptance_outcomes.get(name, "passed")
        _acceptance_outcomes[name] = "failed" if "failed" in (prev, report.outcome) \
            else report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance_outcomes):
        outcome = _acceptance_outcomes[name]
        label = {"passed": "PASS", "failed": "FAIL"}.get(outcome, outcome.upper())
        number, _, title = name[len("test_criterion_"):].partition("_")
        terminalreporter.write_line(f"{label}  criterion {int(number):2d}: {title.replace('_', ' ')}")
