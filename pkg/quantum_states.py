"""
States and observables
======================
Strictly positive density matrices with a cached eigendecomposition,
Hermitian observables and observable tuples, centering A_0 = A - Tr(DA) I,
the change of basis into D's eigenbasis, seeded samplers for sweeps, and the
instance-file format shared with the command line.

Eigenvalues are kept in descending order; each eigenvector column is phased
so that its largest-magnitude component is real and positive.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, List, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
from scipy.stats import unitary_group

from validation import (
    HERMITIAN_TOL,
    POSITIVITY_FLOOR,
    TRACE_TOL,
    DimensionMismatchError,
    SchemaError,
    StrictPositivityError,
    TraceError,
    ValidationError,
    ZeroObservableError,
    check_hermitian,
    check_same_dimension,
    check_square,
)

logger = logging.getLogger(__name__)

# Streams keep the density and each observable of one seeded instance apart.
_DENSITY_STREAM = 0
_OBSERVABLE_STREAM = 1
_UNITARY_STREAM = 2

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def _frozen(matrix: np.ndarray) -> np.ndarray:
    matrix = np.array(matrix, dtype=complex, copy=True)
    matrix.setflags(write=False)
    return matrix


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A state in the interior of the state space; build it with :func:`make_density`."""

    entries: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def expectation(self, matrix: np.ndarray) -> complex:
        """Tr(D M)."""
        return complex(np.sum(self.entries.T * matrix))


@dataclass(frozen=True, eq=False)
class Observable:
    entries: np.ndarray

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True, eq=False)
class ObservableTuple:
    observables: Tuple[Observable, ...]

    @property
    def n(self) -> int:
        return self.observables[0].n

    def __len__(self) -> int:
        return len(self.observables)

    def __iter__(self):
        return iter(self.observables)

    def __getitem__(self, index: int) -> Observable:
        return self.observables[index]

    def stacked(self) -> np.ndarray:
        return np.stack([obs.entries for obs in self.observables])


def _hermitian_eig(matrix: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    eigenvalues, eigenvectors = scipy.linalg.eigh(matrix)
    eigenvalues = eigenvalues[::-1].copy()
    eigenvectors = eigenvectors[:, ::-1].copy()
    pivots = eigenvectors[np.argmax(np.abs(eigenvectors), axis=0), np.arange(eigenvectors.shape[1])]
    eigenvectors = eigenvectors * (np.conj(pivots) / np.abs(pivots))
    return eigenvalues, eigenvectors


def make_density(entries: Any, positivity_floor: float = POSITIVITY_FLOOR,
                 field: str = "density") -> DensityMatrix:
    """Validate a density matrix and cache its eigendecomposition."""
    matrix = check_square(entries, field)
    check_hermitian(matrix, field)
    trace = complex(np.trace(matrix))
    if abs(trace - 1.0) > TRACE_TOL:
        raise TraceError(f"trace is {trace.real:.15g}{trace.imag:+.3g}j, expected 1",
                         field=field, invariant="trace-one")
    eigenvalues, eigenvectors = _hermitian_eig(matrix)
    if eigenvalues[-1] < positivity_floor:
        raise StrictPositivityError(
            f"eigenvalue {eigenvalues[-1]:.3e} is below the strict-positivity floor {positivity_floor:g}",
            field=f"{field}.eigenvalues[{len(eigenvalues) - 1}]", invariant="strictly-positive")
    logger.debug("density n=%d spectrum=%s", matrix.shape[0], eigenvalues)
    eigenvalues = np.array(eigenvalues, dtype=float)
    eigenvalues.setflags(write=False)
    return DensityMatrix(_frozen(matrix), eigenvalues, _frozen(eigenvectors))


def make_observable(entries: Any, field: str = "observable") -> Observable:
    matrix = check_square(entries, field)
    check_hermitian(matrix, field, HERMITIAN_TOL)
    return Observable(_frozen(matrix))


def make_observable_tuple(observables: Sequence[Union[Observable, np.ndarray]],
                          field: str = "observables") -> ObservableTuple:
    """Check a nonempty tuple of nonzero observables of one dimension."""
    if len(observables) == 0:
        raise ValidationError("at least one observable is required", field=field, invariant="nonempty")
    built: List[Observable] = []
    for index, item in enumerate(observables):
        obs = item if isinstance(item, Observable) else make_observable(item, f"{field}[{index}]")
        if built:
            check_same_dimension(built[0].n, obs.entries, f"{field}[{index}]")
        if not np.any(obs.entries):
            raise ZeroObservableError("observable is the zero matrix", field=f"{field}[{index}]",
                                      invariant="nonzero")
        built.append(obs)
    return ObservableTuple(tuple(built))


def _require_match(A: Observable, D: DensityMatrix) -> None:
    if A.n != D.n:
        raise DimensionMismatchError(f"observable is {A.n}x{A.n} but the state is {D.n}x{D.n}",
                                     invariant="dimension")


def expectation(A: Observable, D: DensityMatrix) -> float:
    """Tr(D A), real for Hermitian A."""
    _require_match(A, D)
    return D.expectation(A.entries).real


def center(A: Observable, D: DensityMatrix) -> Observable:
    """A_0 = A - Tr(DA) I, so that Tr(D A_0) = 0."""
    shift = expectation(A, D)
    return Observable(_frozen(A.entries - shift * np.eye(A.n)))


def to_eigenbasis(A: Union[Observable, np.ndarray], D: DensityMatrix) -> np.ndarray:
    """A' = U* A U with U the cached eigenvectors of D."""
    matrix = A.entries if isinstance(A, Observable) else np.asarray(A, dtype=complex)
    if matrix.shape[-2:] != (D.n, D.n):
        raise DimensionMismatchError(f"matrix is {matrix.shape[-2:]} but the state is {D.n}x{D.n}",
                                     invariant="dimension")
    U = D.eigenvectors
    return U.conj().T @ matrix @ U


# --------------------------------------------------------------------------
# Samplers
# --------------------------------------------------------------------------

def generator(seed: int, stream: int = 0, index: int = 0) -> np.random.Generator:
    """Counter-based generator keyed by (seed, stream, index); independent of call order."""
    sequence = np.random.SeedSequence(int(seed), spawn_key=(int(stream), int(index)))
    return np.random.Generator(np.random.Philox(sequence))


def _ginibre(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def sample_density(n: int, seed: int, min_gap: float = 0.0,
                   positivity_floor: float = POSITIVITY_FLOOR) -> DensityMatrix:
    """Ginibre-based random state with every eigenvalue >= min_gap / (1 + n min_gap)."""
    if n < 2:
        raise ValidationError(f"n must be at least 2, got {n}", field="n", invariant="dimension")
    if min_gap < 0:
        raise ValidationError(f"min_gap must be nonnegative, got {min_gap}", field="min_gap",
                              invariant="min-gap")
    rng = generator(seed, _DENSITY_STREAM)
    G = _ginibre(rng, n)
    W = G @ G.conj().T
    W = W / np.trace(W).real + min_gap * np.eye(n)
    W = (W + W.conj().T) / 2.0
    return make_density(W / np.trace(W).real, positivity_floor=positivity_floor)


def sample_observable(n: int, seed: int, stream: int = 0) -> Observable:
    """GUE-style Hermitian matrix (G + G*) / 2."""
    if n < 2:
        raise ValidationError(f"n must be at least 2, got {n}", field="n", invariant="dimension")
    attempt = 0
    while True:
        rng = generator(seed, _OBSERVABLE_STREAM + attempt * 1000, stream)
        G = _ginibre(rng, n)
        H = (G + G.conj().T) / 2.0
        if np.any(H):
            return Observable(_frozen(H))
        attempt += 1


def sample_instance(n: int, N: int, seed: int, min_gap: float = 0.0,
                    positivity_floor: float = POSITIVITY_FLOOR) -> Tuple[DensityMatrix, ObservableTuple]:
    """The (D, observables) pair a sweep trial with this seed uses."""
    D = sample_density(n, seed, min_gap, positivity_floor)
    obs = make_observable_tuple([sample_observable(n, seed, stream=i) for i in range(N)])
    return D, obs


def random_unitary(n: int, seed: int) -> np.ndarray:
    """Haar-distributed unitary."""
    return unitary_group.rvs(n, random_state=generator(seed, _UNITARY_STREAM))


def conjugate_instance(D: DensityMatrix, obs: ObservableTuple,
                       V: np.ndarray) -> Tuple[DensityMatrix, ObservableTuple]:
    """(V D V*, (V A V*)) with Hermiticity restored against rounding."""
    def conj(matrix: np.ndarray) -> np.ndarray:
        rotated = V @ matrix @ V.conj().T
        return (rotated + rotated.conj().T) / 2.0

    rotated_D = conj(D.entries)
    rotated_D = rotated_D / np.trace(rotated_D).real
    return (make_density(rotated_D, positivity_floor=0.0),
            make_observable_tuple([conj(A.entries) for A in obs]))


# --------------------------------------------------------------------------
# Instance files
# --------------------------------------------------------------------------

def _parse_matrix(raw: Any, field: str) -> np.ndarray:
    if not isinstance(raw, list) or not raw:
        raise SchemaError("expected a nonempty list of rows", field=field, invariant="schema")
    rows = []
    for i, row in enumerate(raw):
        if not isinstance(row, list):
            raise SchemaError("expected a list of [re, im] pairs", field=f"{field}[{i}]", invariant="schema")
        values = []
        for j, pair in enumerate(row):
            if (not isinstance(pair, list) or len(pair) != 2
                    or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in pair)):
                raise SchemaError("expected a [re, im] pair of numbers", field=f"{field}[{i}][{j}]",
                                  invariant="schema")
            try:
                values.append(complex(pair[0], pair[1]))
            except OverflowError:
                raise SchemaError("number too large for a double", field=f"{field}[{i}][{j}]",
                                  invariant="schema") from None
        rows.append(values)
    if any(len(row) != len(rows) for row in rows):
        raise SchemaError(f"matrix is not square ({len(rows)} rows)", field=field, invariant="square")
    return np.array(rows, dtype=complex)


def parse_instance(payload: Any,
                   positivity_floor: float = POSITIVITY_FLOOR) -> Tuple[DensityMatrix, ObservableTuple]:
    """Validate a decoded instance document (see :func:`instance_to_json`)."""
    if not isinstance(payload, dict):
        raise SchemaError("top level must be an object", field="$", invariant="schema")
    for key in ("n", "density", "observables"):
        if key not in payload:
            raise SchemaError("missing required key", field=key, invariant="schema")
    n = payload["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise SchemaError("n must be a positive integer", field="n", invariant="schema")
    density = _parse_matrix(payload["density"], "density")
    check_same_dimension(n, density, "density")
    D = make_density(density, positivity_floor=positivity_floor)
    raw_obs = payload["observables"]
    if not isinstance(raw_obs, list):
        raise SchemaError("expected a list of matrices", field="observables", invariant="schema")
    matrices = [_parse_matrix(item, f"observables[{k}]") for k, item in enumerate(raw_obs)]
    for k, matrix in enumerate(matrices):
        check_same_dimension(n, matrix, f"observables[{k}]")
    return D, make_observable_tuple(matrices)


def load_instance(path: Union[str, Path],
                  positivity_floor: float = POSITIVITY_FLOOR) -> Tuple[DensityMatrix, ObservableTuple]:
    """Read an instance file; JSON syntax errors surface as ``json.JSONDecodeError``."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise SchemaError(f"not valid UTF-8 (byte {exc.start})", field="$", invariant="encoding") from None
    return parse_instance(json.loads(text), positivity_floor)


def _matrix_to_json(matrix: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in matrix]


def instance_to_json(D: DensityMatrix, obs: Iterable[Observable]) -> dict:
    return {
        "n": D.n,
        "density": _matrix_to_json(D.entries),
        "observables": [_matrix_to_json(A.entries) for A in obs],
    }
