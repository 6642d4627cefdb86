import json

import numpy as np
import pytest

from quantum_states import (
    PAULI_X,
    PAULI_Z,
    center,
    conjugate_instance,
    expectation,
    generator,
    instance_to_json,
    load_instance,
    make_density,
    make_observable,
    make_observable_tuple,
    parse_instance,
    random_unitary,
    sample_density,
    sample_instance,
    sample_observable,
    to_eigenbasis,
)
from validation import (
    DimensionMismatchError,
    HermiticityError,
    SchemaError,
    StrictPositivityError,
    TraceError,
    ZeroObservableError,
)


def test_density_eigendecomposition_is_sorted_and_phased():
    D = make_density(np.array([[0.6, 0.2j], [-0.2j, 0.4]]))
    assert D.eigenvalues[0] > D.eigenvalues[1]
    U = D.eigenvectors
    np.testing.assert_allclose(U @ np.diag(D.eigenvalues) @ U.conj().T, D.entries, atol=1e-14)
    pivots = U[np.argmax(np.abs(U), axis=0), np.arange(2)]
    assert np.all(np.abs(pivots.imag) < 1e-15)
    assert np.all(pivots.real > 0)


def test_density_is_read_only(qubit_state):
    with pytest.raises(ValueError):
        qubit_state.entries[0, 0] = 1.0
    with pytest.raises(ValueError):
        qubit_state.eigenvalues[0] = 1.0


def test_density_validation_errors():
    with pytest.raises(TraceError):
        make_density(np.diag([0.7, 0.4]))
    with pytest.raises(HermiticityError) as excinfo:
        make_density(np.array([[0.5, 0.1], [0.2, 0.5]]))
    assert excinfo.value.field in ("density[0][1]", "density[1][0]")
    with pytest.raises(StrictPositivityError) as excinfo:
        make_density(np.diag([1.0, 0.0]))
    assert excinfo.value.field == "density.eigenvalues[1]"


def test_observable_tuple_validation():
    with pytest.raises(ZeroObservableError):
        make_observable_tuple([PAULI_X, np.zeros((2, 2))])
    with pytest.raises(DimensionMismatchError):
        make_observable_tuple([PAULI_X, np.eye(3)])
    with pytest.raises(HermiticityError):
        make_observable(np.array([[0, 1], [0, 0]]))
    obs = make_observable_tuple([PAULI_X, PAULI_Z])
    assert len(obs) == 2
    assert obs.n == 2
    assert obs.stacked().shape == (2, 2, 2)


def test_expectation_and_center(qubit_state, sigma_z, sigma_x):
    assert expectation(sigma_z, qubit_state) == pytest.approx(0.4)
    assert expectation(sigma_x, qubit_state) == pytest.approx(0.0)
    centred = center(sigma_z, qubit_state)
    assert expectation(centred, qubit_state) == pytest.approx(0.0, abs=1e-15)


def test_to_eigenbasis_preserves_spectrum(random_instances):
    for D, obs in random_instances:
        A = obs[0]
        primed = to_eigenbasis(A, D)
        np.testing.assert_allclose(primed, primed.conj().T, atol=1e-12)
        np.testing.assert_allclose(np.linalg.eigvalsh(primed), np.linalg.eigvalsh(A.entries), atol=1e-12)


def test_to_eigenbasis_rejects_wrong_dimension(qubit_state):
    with pytest.raises(DimensionMismatchError):
        to_eigenbasis(np.eye(3), qubit_state)


def test_generator_is_counter_based():
    a = generator(5, stream=1, index=3).standard_normal(4)
    b = generator(5, stream=1, index=3).standard_normal(4)
    c = generator(5, stream=1, index=4).standard_normal(4)
    np.testing.assert_array_equal(a, b)
    assert not np.allclose(a, c)


def test_sample_density_floor():
    for seed in range(50):
        for n in (2, 3, 4):
            D = sample_density(n, seed, min_gap=0.05)
            assert np.trace(D.entries).real == pytest.approx(1.0, abs=1e-12)
            assert D.eigenvalues.min() >= 0.05 / (1 + n * 0.05) - 1e-12


def test_sample_instance_is_reproducible():
    D1, obs1 = sample_instance(3, 2, seed=11)
    D2, obs2 = sample_instance(3, 2, seed=11)
    np.testing.assert_array_equal(D1.entries, D2.entries)
    for A, B in zip(obs1, obs2):
        np.testing.assert_array_equal(A.entries, B.entries)
    D3, _ = sample_instance(3, 2, seed=12)
    assert not np.allclose(D1.entries, D3.entries)


def test_sampled_observables_are_hermitian_and_distinct():
    A = sample_observable(3, seed=4, stream=0)
    B = sample_observable(3, seed=4, stream=1)
    np.testing.assert_allclose(A.entries, A.entries.conj().T)
    assert not np.allclose(A.entries, B.entries)


def test_random_unitary_is_unitary():
    V = random_unitary(4, seed=3)
    np.testing.assert_allclose(V @ V.conj().T, np.eye(4), atol=1e-12)
    np.testing.assert_allclose(random_unitary(4, seed=3), V)


def test_conjugate_instance_keeps_spectrum(random_instances):
    D, obs = random_instances[3]
    D2, obs2 = conjugate_instance(D, obs, random_unitary(D.n, seed=1))
    np.testing.assert_allclose(D2.eigenvalues, D.eigenvalues, atol=1e-12)
    assert len(obs2) == len(obs)


def test_instance_document_round_trip(qubit_state, qubit_pair, write_instance):
    path = write_instance(instance_to_json(qubit_state, qubit_pair))
    D, obs = load_instance(path)
    np.testing.assert_allclose(D.entries, qubit_state.entries)
    np.testing.assert_allclose(obs[1].entries, qubit_pair[1].entries)


def test_parse_instance_names_field_paths():
    good = instance_to_json(make_density(np.diag([0.7, 0.3])), make_observable_tuple([PAULI_X]))
    missing = dict(good)
    del missing["observables"]
    with pytest.raises(SchemaError) as excinfo:
        parse_instance(missing)
    assert excinfo.value.field == "observables"

    bad_entry = json.loads(json.dumps(good))
    bad_entry["observables"][0][1][0] = [1.0]
    with pytest.raises(SchemaError) as excinfo:
        parse_instance(bad_entry)
    assert excinfo.value.field == "observables[0][1][0]"

    wrong_n = dict(good, n=3)
    with pytest.raises(DimensionMismatchError):
        parse_instance(wrong_n)

    with pytest.raises(SchemaError):
        parse_instance([1, 2, 3])


def test_load_instance_rejects_malformed_json(write_instance):
    path = write_instance('{"n": 2, "density": [')
    with pytest.raises(json.JSONDecodeError):
        load_instance(path)


def test_center_is_idempotent(random_instances):
    for D, obs in random_instances:
        for A in obs:
            once = center(A, D)
            np.testing.assert_allclose(center(once, D).entries, once.entries, atol=1e-12)


def test_sampled_observable_diagonal_has_zero_mean():
    samples = 10_000
    diagonals = np.concatenate([np.diag(sample_observable(2, seed).entries).real for seed in range(samples)])
    # Re G_ii is standard normal
    assert abs(diagonals.mean()) <= 5.0 / np.sqrt(diagonals.size)


def test_load_instance_rejects_invalid_utf8(tmp_path):
    path = tmp_path / "latin1.json"
    path.write_bytes(b'{"n": 2, "density": "\xff"}')
    with pytest.raises(SchemaError) as excinfo:
        load_instance(path)
    assert excinfo.value.invariant == "encoding"


def test_parse_instance_rejects_numbers_beyond_double_range():
    document = instance_to_json(make_density(np.diag([0.7, 0.3])), make_observable_tuple([PAULI_X]))
    document["observables"][0][0][1] = [10 ** 400, 0]
    with pytest.raises(SchemaError) as excinfo:
        parse_instance(document)
    assert excinfo.value.field == "observables[0][0][1]"
