import pytest

from crystal_lab import PrecisionContext


@pytest.fixture
def ctx3():
    return PrecisionContext(3, 8, 32)


@pytest.fixture
def ctx5():
    return PrecisionContext(5, 8, 32)
