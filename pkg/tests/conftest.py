import numpy as np
import pytest

from pecshadow.circuits import build_circuit
from pecshadow.noise import (
    NoiseSpec,
    ReadoutModel,
    two_qubit_biased_channel,
)
from pecshadow.shadows import sample_shadow_set


def bell_circuit():
    return build_circuit(2, [("h", (0,)), ("cnot", (0, 1))])


def bell_noise(readout=None):
    return NoiseSpec.from_dict(
        {2: two_qubit_biased_channel(0.1, 0.9)},
        readout if readout is not None else ReadoutModel.noiseless(2),
    )


def bell_noiseless():
    return NoiseSpec.from_dict({}, ReadoutModel.noiseless(2))


@pytest.fixture(scope="session")
def bell_pec_pool():
    return sample_shadow_set(bell_circuit(), bell_noise(), "pec", 60_000, seed=101)


@pytest.fixture(scope="session")
def bell_conventional_pool():
    return sample_shadow_set(
        bell_circuit(), bell_noise(), "conventional", 60_000, seed=102
    )


@pytest.fixture(scope="session")
def bell_ideal_pool():
    """Noiseless conventional shadows of the Bell state."""
    return sample_shadow_set(
        bell_circuit(), bell_noiseless(), "conventional", 60_000, seed=103
    )


@pytest.fixture(scope="session")
def bell_readout_pool():
    """PEC shadows with asymmetric readout flips."""
    noise = bell_noise(ReadoutModel((0.02, 0.05), (0.08, 0.01)))
    return sample_shadow_set(bell_circuit(), noise, "pec", 60_000, seed=104)
