import pytest

from leadersim.core import RplConstants, SecretKey


@pytest.fixture
def consts():
    return RplConstants()


@pytest.fixture
def key():
    return SecretKey(bytes(range(16)))
