import warnings

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(autouse=True)
def _quiet_critical_value_warning():
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="rho_star is a critical value", category=RuntimeWarning)
        yield
