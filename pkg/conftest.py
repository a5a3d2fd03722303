import numpy as np
import pytest

from catalog import make


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def sphere():
    return make("sphere")


@pytest.fixture
def supint():
    return make("supint.quotient")
