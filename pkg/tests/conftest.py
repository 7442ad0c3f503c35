import pytest

from dgexplain.io import bundled_model

from cases import luna, ternary


@pytest.fixture
def ternary_case():
    return ternary()


@pytest.fixture
def luna_case():
    return luna()


@pytest.fixture(scope="session")
def admissions():
    return bundled_model("admissions")


@pytest.fixture(scope="session")
def iris():
    return bundled_model("iris")


@pytest.fixture(scope="session")
def targeted():
    return bundled_model("targeted")

