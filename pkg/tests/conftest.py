import pytest

from prospect_pricing import experiments
from prospect_pricing.game import solve_nash


@pytest.fixture(scope="session")
def default_scenario():
    return experiments.build_scenario()


@pytest.fixture(scope="session")
def default_ne(default_scenario):
    return solve_nash(default_scenario)


@pytest.fixture(scope="session")
def default_ref(default_scenario, default_ne):
    return experiments.reference_offer(default_scenario, default_ne)
