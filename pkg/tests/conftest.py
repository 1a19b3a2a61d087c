import pytest

from borrowkit.scenario import load_scenario


@pytest.fixture(scope="session")
def normal_scenario():
    return load_scenario("paper-normal")


@pytest.fixture(scope="session")
def binomial_scenario():
    return load_scenario("paper-binomial")
