import numpy as np
import pytest

from noisyqsv import noise, states


@pytest.fixture(scope="session")
def code5():
    return states.five_qubit_code()


@pytest.fixture(scope="session")
def code5_noisy(code5):
    """Five-qubit code strategy under uniform eta = 0.02 on every qubit and basis."""
    strat = states.stabilizer_strategy(code5)
    params = noise.QubitNoiseParams.uniform(5, 0.02)
    return states.stabilizer_state(code5), noise.noisy_strategy(strat, params).operator


@pytest.fixture(scope="session")
def w3_instance():
    psi = states.w_state(3)
    params = noise.random_noise(3, 0.0, 0.3, seed=0)
    return psi, noise.noisy_strategy(states.w_strategy(3), params).operator


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
