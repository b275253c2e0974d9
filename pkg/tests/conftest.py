import numpy as np
import pytest

from gibbs_lab import oracle


@pytest.fixture(scope="session")
def rho():
    """Oracle estimate of the variance-ratio floor; computed once."""
    return oracle.estimate_rho().value


@pytest.fixture()
def rng():
    return np.random.default_rng(20260810)
