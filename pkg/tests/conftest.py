import numpy as np
import pytest

from serialsat.bodies import AttitudeState, strawman_chain
from serialsat.control import LqrWeights, PoleSet, lqr_gain, robust_pole_assignment
from serialsat.linearize import Equilibrium, linearize
from serialsat.simulate import SimConfig, simulate_closed_loop

PAPER_POLES = (-0.0141, -0.0135, -0.0059, -0.0058, -0.0037,
               -0.0036, -0.0029, -0.0028, -0.00265, -0.00262)


def paper_weights() -> LqrWeights:
    return LqrWeights(q=np.diag([1000.0] * 8 + [2000.0] * 2), r=np.eye(5))


@pytest.fixture(scope="session")
def chain():
    return strawman_chain()


@pytest.fixture(scope="session")
def roll_target():
    return AttitudeState.zero_rates(roll=np.pi / 2)


@pytest.fixture(scope="session")
def linear_model(chain, roll_target):
    eq = Equilibrium.at(chain, roll_target)
    return eq, linearize(chain, eq)


@pytest.fixture(scope="session")
def lqr_design(linear_model):
    _, model = linear_model
    return lqr_gain(model.a, model.b, paper_weights())


@pytest.fixture(scope="session")
def rpa_design(linear_model):
    _, model = linear_model
    return robust_pole_assignment(model.a, model.b, PoleSet(PAPER_POLES))


@pytest.fixture(scope="session", autouse=True)
def warm_kernel(chain):
    """Trigger the numba compile once so timed tests measure steady state."""
    sim = SimConfig(duration=0.02, dt=0.01, x0=AttitudeState.zero_rates(),
                    x_target=AttitudeState.zero_rates())
    simulate_closed_loop(chain, sim)
