import pytest

from insider_default.market import ModelParams, validate


@pytest.fixture(scope="session")
def model():
    """Base model: mu0=3%, sigma0=20%, gamma=0.2, p=0.8, delta=0.5, lambda=0.3."""
    return validate(ModelParams())
