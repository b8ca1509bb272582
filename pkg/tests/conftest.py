import pytest

from teachbench.fixtures import fixture_text
from teachbench.urdf import build_chain, parse_urdf


@pytest.fixture(scope="session")
def minimal_model():
    return parse_urdf(fixture_text("minimal"))


@pytest.fixture(scope="session")
def planar_model():
    return parse_urdf(fixture_text("planar_two_link"))


@pytest.fixture(scope="session")
def planar_chain(planar_model):
    return build_chain(planar_model, "base", "tip")


@pytest.fixture(scope="session")
def ur5e_model():
    return parse_urdf(fixture_text("ur5e"))


@pytest.fixture(scope="session")
def ur5e_chain(ur5e_model):
    return build_chain(ur5e_model, "base_link", "tool0")
