import pytest

from cavlab.spectrum import CavityShape, enumerate_class


@pytest.fixture(scope="session")
def shape13():
    return CavityShape(1, 3)


@pytest.fixture(scope="session")
def shape14():
    return CavityShape(1, 4)


@pytest.fixture(scope="session")
def shape41():
    return CavityShape(4, 1)


@pytest.fixture(scope="session")
def square():
    return CavityShape(1, 1)


@pytest.fixture(scope="session")
def case1_class(shape13):
    return enumerate_class(shape13, 112)


@pytest.fixture(scope="session")
def case2_class(shape13):
    return enumerate_class(shape13, 28)


@pytest.fixture(scope="session")
def case3_class(shape14):
    return enumerate_class(shape14, 1300)


@pytest.fixture(scope="session")
def case4_class(shape41):
    return enumerate_class(shape41, 1300)
