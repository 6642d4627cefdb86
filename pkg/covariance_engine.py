"""
Metric inner products and covariances
=====================================
Spectral evaluation of the kernel inner product

    (A, B)_{D,g} = sum_{k,l} A'_{lk} B'_{kl} g(lambda_k, lambda_l),  A' = U* A U,

the monotone metric <A, B>_{D,f} (g = 1/m_f), the classical covariance
(trace formula, with the spectral sum over g_cl as a cross-check), the
asymmetric and symmetric quantum covariances (kernel path, with the
commutator/anticommutator metric path as a cross-check), and the N x N
covariance matrices of observable tuples used by the determinant checks.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
import scipy.linalg

from monotone_functions import (
    CLASSICAL,
    CMKernel,
    FopSpec,
    asymmetric_kernel,
    f_zero,
    inverse_mean_kernel,
    kernel_matrix,
    symmetric_kernel,
)
from quantum_states import (
    DensityMatrix,
    Observable,
    ObservableTuple,
    center,
    expectation,
    to_eigenbasis,
)
from validation import (
    PSD_SLACK,
    SYMMETRY_TOL,
    DimensionMismatchError,
    InternalConsistencyError,
    ValidationError,
    psd_scale,
)

logger = logging.getLogger(__name__)

IMAG_RESIDUE_TOL = 1e-8


class CovarianceKind(enum.Enum):
    CLASSICAL = "classical"
    SYMMETRIC_F = "symmetric"
    ASYMMETRIC_F = "asymmetric"
    GENERIC_G = "generic-g"
    COMMUTATOR_BOUND = "commutator-bound"


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    kind: CovarianceKind
    entries: np.ndarray
    n: int
    N: int
    f: Optional[FopSpec] = None
    kernel: Optional[CMKernel] = None

    @property
    def label(self) -> str:
        if self.kernel is not None:
            return self.kernel.label
        return self.kind.value

    def det(self) -> float:
        return float(scipy.linalg.det(self.entries))

    def eigenvalues(self) -> np.ndarray:
        return scipy.linalg.eigvalsh(self.entries)

    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues()[0])

    def condition_number(self) -> float:
        magnitudes = np.abs(self.eigenvalues())
        smallest = magnitudes.min()
        return float(np.inf) if smallest == 0.0 else float(magnitudes.max() / smallest)


def _check_imaginary_residue(value: np.ndarray, magnitude: np.ndarray, what: str) -> None:
    residue = np.abs(np.imag(value))
    allowed = IMAG_RESIDUE_TOL * np.maximum(magnitude, np.finfo(float).tiny)
    if np.any(residue > allowed):
        raise InternalConsistencyError(
            f"{what}: imaginary residue {float(residue.max()):.3e} exceeds "
            f"{IMAG_RESIDUE_TOL:g} x magnitude; inner products of Hermitian matrices must be real")


def _require_dims(D: DensityMatrix, *matrices: np.ndarray) -> None:
    for matrix in matrices:
        if matrix.shape[-2:] != (D.n, D.n):
            raise DimensionMismatchError(f"matrix is {matrix.shape[-2:]} but the state is {D.n}x{D.n}",
                                         invariant="dimension")


def _entries(A: Union[Observable, np.ndarray]) -> np.ndarray:
    return A.entries if isinstance(A, Observable) else np.asarray(A, dtype=complex)


def _kernel_on_spectrum(D: DensityMatrix, g: CMKernel) -> np.ndarray:
    G = kernel_matrix(g, D.eigenvalues)
    if not np.all(np.isfinite(G)):
        raise InternalConsistencyError(f"kernel {g.label} is not finite on the spectrum {D.eigenvalues}")
    return G


def inner_g_complex(D: DensityMatrix, A: Union[Observable, np.ndarray],
                    B: Union[Observable, np.ndarray], g: CMKernel) -> complex:
    """(A, B)_{D,g} for arbitrary (not necessarily Hermitian) matrices."""
    a, b = _entries(A), _entries(B)
    _require_dims(D, a, b)
    G = _kernel_on_spectrum(D, g)
    return complex(np.sum(to_eigenbasis(a, D).T * to_eigenbasis(b, D) * G))


def inner_g(D: DensityMatrix, A: Observable, B: Observable, g: CMKernel) -> float:
    """(A, B)_{D,g} for Hermitian A, B; real by symmetry of g."""
    _require_dims(D, A.entries, B.entries)
    G = _kernel_on_spectrum(D, g)
    terms = to_eigenbasis(A, D).T * to_eigenbasis(B, D) * G
    value = np.sum(terms)
    _check_imaginary_residue(value, np.sum(np.abs(terms)), f"({g.label}) inner product")
    return float(value.real)


def inner_f(D: DensityMatrix, A: Observable, B: Observable, f: FopSpec) -> float:
    """The monotone metric <A, B>_{D,f}."""
    return inner_g(D, A, B, inverse_mean_kernel(f))


def _hermitian(matrix: np.ndarray) -> Observable:
    return Observable((matrix + matrix.conj().T) / 2.0)


def commutator_i(D: DensityMatrix, A: Observable) -> Observable:
    """i[D, A], Hermitian for Hermitian A."""
    return _hermitian(1j * (D.entries @ A.entries - A.entries @ D.entries))


def anticommutator(D: DensityMatrix, A: Observable) -> Observable:
    """{D, A}."""
    return _hermitian(D.entries @ A.entries + A.entries @ D.entries)


def cov(D: DensityMatrix, A: Observable, B: Observable) -> float:
    """Symmetrised covariance 1/2 (Tr DAB + Tr DBA) - Tr(DA) Tr(DB)."""
    _require_dims(D, A.entries, B.entries)
    product = A.entries @ B.entries
    symmetrised = 0.5 * (D.expectation(product) + D.expectation(product.conj().T))
    return float(symmetrised.real) - expectation(A, D) * expectation(B, D)


def cov_spectral(D: DensityMatrix, A: Observable, B: Observable) -> float:
    """Cov_D(A, B) as (A_0, B_0)_{D,g_cl}."""
    return inner_g(D, center(A, D), center(B, D), CLASSICAL)


def qcov_as(D: DensityMatrix, f: FopSpec, A: Observable, B: Observable) -> float:
    """Asymmetric quantum covariance, kernel path (A, B)_{D,g^as_f}."""
    return inner_g(D, A, B, asymmetric_kernel(f))


def qcov_as_commutator(D: DensityMatrix, f: FopSpec, A: Observable, B: Observable) -> float:
    """(f(0)/2) <i[D,A], i[D,B]>_{D,f}."""
    return 0.5 * f_zero(f) * inner_f(D, commutator_i(D, A), commutator_i(D, B), f)


def qcov_s(D: DensityMatrix, f: FopSpec, A: Observable, B: Observable) -> float:
    """Symmetric quantum covariance, kernel path (A, B)_{D,g^s_f}; not centering invariant."""
    return inner_g(D, A, B, symmetric_kernel(f))


def qcov_s_anticommutator(D: DensityMatrix, f: FopSpec, A: Observable, B: Observable) -> float:
    """(f(0)/2) <{D,A}, {D,B}>_{D,f}."""
    return 0.5 * f_zero(f) * inner_f(D, anticommutator(D, A), anticommutator(D, B), f)


def qcov_s_centering_correction(D: DensityMatrix, f: FopSpec, A: Observable, B: Observable) -> float:
    """2 f(0) Tr(DA) Tr(DB): the gap qcov_s(A, B) - qcov_s(A_0, B_0)."""
    return 2.0 * f_zero(f) * expectation(A, D) * expectation(B, D)


def kernel_for(kind: CovarianceKind, f: Optional[FopSpec] = None,
               kernel: Optional[CMKernel] = None) -> CMKernel:
    if kind is CovarianceKind.CLASSICAL:
        return CLASSICAL
    if kind is CovarianceKind.GENERIC_G:
        if kernel is None:
            raise ValidationError("generic-g covariance needs a kernel", invariant="covariance-kind")
        return kernel
    if kind in (CovarianceKind.SYMMETRIC_F, CovarianceKind.ASYMMETRIC_F):
        if f is None:
            raise ValidationError(f"{kind.value} covariance needs a function spec", invariant="covariance-kind")
        return symmetric_kernel(f) if kind is CovarianceKind.SYMMETRIC_F else asymmetric_kernel(f)
    raise ValidationError(f"{kind.value} is not a kernel covariance", invariant="covariance-kind")


def validate_covariance_matrix(matrix: CovarianceMatrix) -> CovarianceMatrix:
    M = matrix.entries
    scale = float(np.max(np.abs(M))) if M.size else 0.0
    if matrix.kind is CovarianceKind.COMMUTATOR_BOUND:
        if np.any(np.abs(M + M.T) > SYMMETRY_TOL * max(scale, 1.0)):
            raise InternalConsistencyError("commutator-bound matrix is not antisymmetric")
        return matrix
    if np.any(np.abs(M - M.T) > SYMMETRY_TOL * scale):
        raise InternalConsistencyError(f"{matrix.label} covariance matrix is not symmetric")
    smallest = matrix.min_eigenvalue()
    if smallest < -PSD_SLACK * psd_scale(M):
        raise InternalConsistencyError(
            f"{matrix.label} covariance matrix has eigenvalue {smallest:.3e}; "
            f"it must be positive semidefinite")
    return matrix


def _centered_eigenbasis(D: DensityMatrix, obs: ObservableTuple) -> np.ndarray:
    if obs.n != D.n:
        raise DimensionMismatchError(f"observables are {obs.n}x{obs.n} but the state is {D.n}x{D.n}",
                                     invariant="dimension")
    return np.stack([to_eigenbasis(center(A, D), D) for A in obs])


def kernel_gram(D: DensityMatrix, obs: ObservableTuple, g: CMKernel) -> np.ndarray:
    """M_ab = (A_0^(a), A_0^(b))_{D,g} as a real symmetric array (not validated)."""
    primed = _centered_eigenbasis(D, obs)
    G = _kernel_on_spectrum(D, g)
    gram = np.einsum("akl,bkl,kl->ab", primed.conj(), primed, G)
    magnitude = np.einsum("akl,bkl,kl->ab", np.abs(primed), np.abs(primed), np.abs(G))
    _check_imaginary_residue(gram, magnitude, f"({g.label}) covariance matrix")
    real = gram.real
    return (real + real.T) / 2.0


def cov_matrix(D: DensityMatrix, obs: ObservableTuple,
               kind: CovarianceKind = CovarianceKind.CLASSICAL,
               f: Optional[FopSpec] = None, kernel: Optional[CMKernel] = None) -> CovarianceMatrix:
    """Pairwise covariances of the centred observables for one covariance kind."""
    if kind is CovarianceKind.COMMUTATOR_BOUND:
        return commutator_bound_matrix(D, obs)
    g = kernel_for(kind, f, kernel)
    matrix = CovarianceMatrix(kind, kernel_gram(D, obs, g), D.n, len(obs), f=f, kernel=g)
    logger.debug("%s matrix:\n%s", g.label, matrix.entries)
    return validate_covariance_matrix(matrix)


def commutator_bound_matrix(D: DensityMatrix, obs: ObservableTuple) -> CovarianceMatrix:
    """M_hj = -(i/2) Tr(D [A_h, A_j]); real antisymmetric."""
    if obs.n != D.n:
        raise DimensionMismatchError(f"observables are {obs.n}x{obs.n} but the state is {D.n}x{D.n}",
                                     invariant="dimension")
    stacked = obs.stacked()
    weighted = np.einsum("kl,alm->akm", D.entries, stacked)
    traces = np.einsum("akl,blk->ab", weighted, stacked)
    bound = -0.5j * (traces - traces.T)
    magnitude = np.einsum("akl,blk->ab", np.abs(weighted), np.abs(stacked))
    _check_imaginary_residue(bound, magnitude, "commutator-bound matrix")
    real = bound.real
    matrix = CovarianceMatrix(CovarianceKind.COMMUTATOR_BOUND, (real - real.T) / 2.0, D.n, len(obs))
    return validate_covariance_matrix(matrix)


def kernel_quadratic_form(D: DensityMatrix, C: np.ndarray, g: CMKernel) -> float:
    """sum_{h,j} g(lambda_h, lambda_j) |C'_{hj}|^2."""
    c = np.asarray(C, dtype=complex)
    _require_dims(D, c)
    G = _kernel_on_spectrum(D, g)
    return float(np.sum(G * np.abs(to_eigenbasis(c, D)) ** 2))


def quadratic_form(matrix: CovarianceMatrix, x: np.ndarray) -> float:
    """x* M x for complex x."""
    x = np.asarray(x, dtype=complex)
    return float(np.real(x.conj() @ matrix.entries @ x))
