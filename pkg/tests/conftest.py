import numpy as np
import pytest

from vptransport import AnsatzFunction, PointMassState, solve_steady_state
from vptransport.relativistic import solve_relativistic_steady_state


@pytest.fixture(scope="session")
def state():
    """Default equilibrium: polytropic exponent 1, central value 1."""
    return solve_steady_state(AnsatzFunction(k=1.0))


@pytest.fixture(scope="session")
def point_mass():
    return PointMassState(M0=1.0, E0=-0.1)


@pytest.fixture(scope="session")
def rel_state():
    return solve_relativistic_steady_state(
        AnsatzFunction(k=1.0, amplitude=0.5, cutoff_energy=0.95)
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
