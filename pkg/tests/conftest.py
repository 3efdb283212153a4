import numpy as np
import pytest

from iphs.models import (
    TwoCompartmentParams,
    two_compartment_closed,
    two_compartment_irreversible,
    two_compartment_legacy,
)


@pytest.fixture
def params():
    return TwoCompartmentParams()


@pytest.fixture
def irr(params):
    return two_compartment_irreversible(params)


@pytest.fixture
def legacy(params):
    return two_compartment_legacy(params)


@pytest.fixture
def closed(params):
    return two_compartment_closed(params)


@pytest.fixture
def x_ref(params):
    """State with T1 = 300, T2 = 350."""
    return params.state_from_temperatures(300.0, 350.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
