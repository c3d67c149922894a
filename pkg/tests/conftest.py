import pytest

from helpers import pinhole


@pytest.fixture
def calib():
    return pinhole()
