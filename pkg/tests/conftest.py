"""Common test fixtures for the uncertainty-relation checks."""

import json

import numpy as np
import pytest

from quantum_states import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    instance_to_json,
    make_density,
    make_observable,
    make_observable_tuple,
    sample_instance,
)


@pytest.fixture
def paulis():
    return PAULI_X, PAULI_Y, PAULI_Z


@pytest.fixture
def qubit_state():
    # D = diag(0.7, 0.3); expectation of sigma_z is 0.4
    return make_density(np.diag([0.7, 0.3]))


@pytest.fixture
def sigma_x():
    return make_observable(PAULI_X)


@pytest.fixture
def sigma_y():
    return make_observable(PAULI_Y)


@pytest.fixture
def sigma_z():
    return make_observable(PAULI_Z)


@pytest.fixture
def qubit_pair():
    return make_observable_tuple([PAULI_X, PAULI_Y])


@pytest.fixture
def random_instances():
    """Seeded (D, observables) pairs over a few shapes."""
    shapes = [(2, 1), (2, 2), (3, 2), (3, 3), (4, 2)]
    return [sample_instance(n, N, seed) for seed, (n, N) in enumerate(shapes * 4)]


@pytest.fixture
def write_instance(tmp_path):
    """Write an instance document (dict or raw text) and return its path."""
    def _write(document, name="instance.json"):
        path = tmp_path / name
        path.write_text(document if isinstance(document, str) else json.dumps(document))
        return str(path)
    return _write


@pytest.fixture
def qubit_instance_file(write_instance, qubit_state, qubit_pair):
    return write_instance(instance_to_json(qubit_state, qubit_pair), "qubit.json")
