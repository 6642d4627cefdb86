"""
Operator monotone functions and the kernels derived from them
=============================================================
Catalog of the symmetric, normalised operator monotone functions used by the
checks (SLD, Wigner-Yanase, Wigner-Yanase-Dyson, Kubo-Mori), their means
m_f(x, y) = y f(x/y), their limits f(0), and the Chentsov-Morozova kernels
built from them:

    g_cl(x, y)   = (x + y) / 2
    g^as_f(x, y) = f(0) (x - y)^2 / (2 m_f(x, y))
    g^s_f(x, y)  = f(0) (x + y)^2 / (2 m_f(x, y))
    1/m_f(x, y)  (the monotone metric itself)

Everything here is vectorised over numpy arrays and pure.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
import scipy.linalg

from validation import DomainError, DominanceViolationError, ValidationError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

BETA_RANGE = (-1.0, 2.0)
DOMINANCE_TOL = 1e-12
LOG_MEAN_SERIES_THRESHOLD = 1e-8
DEFAULT_GRID = (1e-6, 1e6, 200)


class Family(enum.Enum):
    SLD = "sld"
    WY = "wy"
    WYD = "wyd"
    KUBO_MORI = "km"


@dataclass(frozen=True)
class FopSpec:
    """An element of the catalog; ``beta`` is only meaningful for WYD."""

    family: Family
    beta: Optional[float] = None

    def __post_init__(self):
        if self.family is Family.WYD:
            if self.beta is None:
                raise DomainError("wyd requires a beta parameter")
            beta = float(self.beta)
            if not math.isfinite(beta) or not BETA_RANGE[0] <= beta <= BETA_RANGE[1]:
                raise DomainError(f"wyd beta must lie in [-1, 2], got {self.beta}")
            object.__setattr__(self, "beta", beta)
        elif self.beta is not None:
            raise DomainError(f"{self.family.value} takes no beta parameter")

    @property
    def label(self) -> str:
        if self.family is Family.WYD:
            return f"wyd:{self.beta!r}"
        return self.family.value

    @property
    def is_kubo_mori_limit(self) -> bool:
        return self.family is Family.KUBO_MORI or (
            self.family is Family.WYD and self.beta in (0.0, 1.0))

    def __str__(self) -> str:
        return self.label


SLD = FopSpec(Family.SLD)
WY = FopSpec(Family.WY)
KUBO_MORI = FopSpec(Family.KUBO_MORI)


def wyd(beta: float) -> FopSpec:
    return FopSpec(Family.WYD, beta)


# Functions swept by the property tests and the default CLI catalog.
CATALOG: Tuple[FopSpec, ...] = (SLD, WY, wyd(-1.0), wyd(0.3), wyd(0.5), wyd(1.5), KUBO_MORI)


def parse_spec(text: str) -> FopSpec:
    """Parse ``sld``, ``wy``, ``km`` or ``wyd:<beta>``."""
    raw = text.strip().lower()
    name, _, param = raw.partition(":")
    try:
        family = Family(name)
    except ValueError:
        raise ValidationError(f"unknown function spec {text!r}; expected sld, wy, km or wyd:<beta>",
                              invariant="function-spec") from None
    if family is Family.WYD:
        if not param:
            raise ValidationError(f"{text!r}: wyd needs a beta, e.g. wyd:0.5", invariant="function-spec")
        try:
            beta = float(param)
        except ValueError:
            raise ValidationError(f"{text!r}: beta is not a number", invariant="function-spec") from None
        try:
            return FopSpec(family, beta)
        except DomainError as exc:
            raise ValidationError(str(exc), invariant="function-spec") from None
    if param:
        raise ValidationError(f"{text!r}: {family.value} takes no parameter", invariant="function-spec")
    return FopSpec(family)


def _check_positive(value: np.ndarray, name: str) -> None:
    if np.any(~(value > 0)):
        bad = value[~(value > 0)].flat[0] if value.ndim else value
        raise DomainError(f"{name} must be positive, got {bad}")


def _as_output(result: np.ndarray, scalar: bool) -> ArrayLike:
    return float(result) if scalar else result


def _kubo_mori(t: np.ndarray) -> np.ndarray:
    log_t = np.log(t)
    with np.errstate(divide="ignore", invalid="ignore"):
        value = np.expm1(log_t) / log_t
    return np.where(log_t == 0.0, 1.0, value)


def _log_abs_expm1(a: np.ndarray) -> np.ndarray:
    """log|e^a - 1|, finite for every finite a != 0."""
    with np.errstate(divide="ignore", over="ignore"):
        small = np.log(np.abs(np.expm1(np.minimum(a, 1.0))))
        large = a + np.log1p(-np.exp(-np.maximum(a, 1.0)))
    return np.where(a > 1.0, large, small)


def _wyd(beta: float, t: np.ndarray) -> np.ndarray:
    # both numerator and denominator carry the sign of beta (1 - beta); work with magnitudes in log space
    log_t = np.log(t)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_value = (np.log(abs(beta * (1.0 - beta))) + 2.0 * np.log(np.abs(t - 1.0))
                     - _log_abs_expm1(beta * log_t) - _log_abs_expm1((1.0 - beta) * log_t))
        value = np.exp(log_value)
    return np.where(log_t == 0.0, 1.0, value)


def _f_unchecked(spec: FopSpec, t: np.ndarray) -> np.ndarray:
    if spec.family is Family.SLD:
        return (1.0 + t) / 2.0
    if spec.family is Family.WY:
        return (np.sqrt(t) + 1.0) ** 2 / 4.0
    if spec.is_kubo_mori_limit:
        return _kubo_mori(t)
    return _wyd(spec.beta, t)


def eval_f(spec: FopSpec, x: ArrayLike) -> ArrayLike:
    """Evaluate f at positive ``x`` (scalar or array)."""
    arr = np.asarray(x, dtype=float)
    _check_positive(arr, "x")
    return _as_output(_f_unchecked(spec, arr), arr.ndim == 0)


def f_zero(spec: FopSpec) -> float:
    """lim_{x -> 0+} f(x)."""
    if spec.family is Family.SLD:
        return 0.5
    if spec.family is Family.WY:
        return 0.25
    if spec.family is Family.WYD and 0.0 < spec.beta < 1.0:
        return spec.beta * (1.0 - spec.beta)
    return 0.0


def is_regular(spec: FopSpec) -> bool:
    return f_zero(spec) > 0.0


def _logarithmic_mean(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    close = (hi - lo) < LOG_MEAN_SERIES_THRESHOLD * hi
    with np.errstate(divide="ignore", invalid="ignore"):
        closed = (hi - lo) / (np.log(hi) - np.log(lo))
    u = (hi - lo) / (hi + lo)
    series = 0.5 * (hi + lo) * (1.0 - u ** 2 / 3.0 - 4.0 * u ** 4 / 45.0)
    return np.where(close, series, closed)


def _mean_unchecked(spec: FopSpec, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    lo = np.minimum(x, y)
    hi = np.maximum(x, y)
    if spec.is_kubo_mori_limit:
        return _logarithmic_mean(lo, hi)
    # m_f(x, y) = y f(x/y) = x f(y/x); keep the argument of f in (0, 1]
    return hi * _f_unchecked(spec, lo / hi)


def mean_mf(spec: FopSpec, x: ArrayLike, y: ArrayLike) -> ArrayLike:
    """The operator mean m_f(x, y) = y f(x / y)."""
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    _check_positive(xa, "x")
    _check_positive(ya, "y")
    xa, ya = np.broadcast_arrays(xa, ya)
    return _as_output(_mean_unchecked(spec, xa, ya), xa.ndim == 0)


def apply_f_matrix(spec: FopSpec, matrix: np.ndarray) -> np.ndarray:
    """f(A) for a Hermitian positive definite A, through its eigendecomposition."""
    eigenvalues, eigenvectors = scipy.linalg.eigh(matrix)
    _check_positive(eigenvalues, "eigenvalues of A")
    return (eigenvectors * _f_unchecked(spec, eigenvalues)) @ eigenvectors.conj().T


# --------------------------------------------------------------------------
# Chentsov-Morozova kernels
# --------------------------------------------------------------------------

class KernelKind(enum.Enum):
    CLASSICAL = "classical"
    SYMMETRIC_F = "symmetric"
    ASYMMETRIC_F = "asymmetric"
    INVERSE_MEAN = "inverse-mean"
    DIFFERENCE = "difference"
    CUSTOM = "custom"


@dataclass(frozen=True)
class CMKernel:
    kind: KernelKind
    f: Optional[FopSpec] = None
    minuend: Optional["CMKernel"] = None
    subtrahend: Optional["CMKernel"] = None
    func: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    name: Optional[str] = None

    @property
    def label(self) -> str:
        if self.kind is KernelKind.CLASSICAL:
            return "cl"
        if self.kind is KernelKind.SYMMETRIC_F:
            return f"s:{self.f.label}"
        if self.kind is KernelKind.ASYMMETRIC_F:
            return f"as:{self.f.label}"
        if self.kind is KernelKind.INVERSE_MEAN:
            return f"inv:{self.f.label}"
        if self.kind is KernelKind.DIFFERENCE:
            return f"({self.minuend.label})-({self.subtrahend.label})"
        return f"custom:{self.name}"

    def __str__(self) -> str:
        return self.label


CLASSICAL = CMKernel(KernelKind.CLASSICAL)


def symmetric_kernel(spec: FopSpec) -> CMKernel:
    return CMKernel(KernelKind.SYMMETRIC_F, f=spec)


def asymmetric_kernel(spec: FopSpec) -> CMKernel:
    return CMKernel(KernelKind.ASYMMETRIC_F, f=spec)


def inverse_mean_kernel(spec: FopSpec) -> CMKernel:
    return CMKernel(KernelKind.INVERSE_MEAN, f=spec)


def difference_kernel(minuend: CMKernel, subtrahend: CMKernel) -> CMKernel:
    return CMKernel(KernelKind.DIFFERENCE, minuend=minuend, subtrahend=subtrahend)


def custom_kernel(func: Callable[[np.ndarray, np.ndarray], np.ndarray], name: str,
                  grid: Tuple[float, float, int] = (1e-3, 1e3, 25)) -> CMKernel:
    """Wrap a numeric kernel after checking symmetry and positivity on a sample grid."""
    points = np.geomspace(*grid)
    x, y = np.meshgrid(points, points, indexing="ij")
    values = np.asarray(func(x, y), dtype=float)
    swapped = np.asarray(func(y, x), dtype=float)
    scale = np.maximum(1.0, np.abs(values))
    if not np.all(np.isfinite(values)):
        raise ValidationError(f"kernel {name!r} is not finite on the sample grid", invariant="cm-kernel")
    if np.any(np.abs(values - swapped) > 1e-12 * scale):
        raise ValidationError(f"kernel {name!r} is not symmetric", invariant="cm-kernel")
    if np.any(values < -1e-12 * scale):
        raise ValidationError(f"kernel {name!r} takes negative values", invariant="cm-kernel")
    return CMKernel(KernelKind.CUSTOM, func=func, name=name)


def parse_kernel(text: str) -> CMKernel:
    """Parse ``cl``, ``s:<f>``, ``as:<f>`` or ``inv:<f>``."""
    raw = text.strip().lower()
    if raw == "cl":
        return CLASSICAL
    head, _, rest = raw.partition(":")
    builders = {"s": symmetric_kernel, "as": asymmetric_kernel, "inv": inverse_mean_kernel}
    if head not in builders or not rest:
        raise ValidationError(f"unknown kernel spec {text!r}; expected cl, s:<f>, as:<f> or inv:<f>",
                              invariant="kernel-spec")
    return builders[head](parse_spec(rest))


def _kernel_unchecked(kernel: CMKernel, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    kind = kernel.kind
    if kind is KernelKind.CLASSICAL:
        return (x + y) / 2.0
    if kind is KernelKind.INVERSE_MEAN:
        return 1.0 / _mean_unchecked(kernel.f, x, y)
    if kind in (KernelKind.SYMMETRIC_F, KernelKind.ASYMMETRIC_F):
        f0 = f_zero(kernel.f)
        if f0 == 0.0:
            return np.zeros(np.broadcast(x, y).shape)
        spread = (x + y) if kind is KernelKind.SYMMETRIC_F else (x - y)
        return f0 * spread ** 2 / (2.0 * _mean_unchecked(kernel.f, x, y))
    if kind is KernelKind.DIFFERENCE:
        upper = _kernel_unchecked(kernel.minuend, x, y)
        lower = _kernel_unchecked(kernel.subtrahend, x, y)
        value = upper - lower
        floor = -DOMINANCE_TOL * np.maximum(1.0, np.abs(upper))
        if np.any(value < floor):
            idx = np.unravel_index(int(np.argmin(value - floor)), value.shape) if value.ndim else ()
            raise DominanceViolationError(
                f"{kernel.label} = {float(value[idx]):.3e} < 0 at "
                f"(x, y) = ({float(np.broadcast_to(x, value.shape)[idx]):.6g}, "
                f"{float(np.broadcast_to(y, value.shape)[idx]):.6g})")
        return value
    return np.asarray(kernel.func(x, y), dtype=float)


def eval_kernel(kernel: CMKernel, x: ArrayLike, y: ArrayLike) -> ArrayLike:
    """Evaluate g(x, y) for positive x, y (broadcasting)."""
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    _check_positive(xa, "x")
    _check_positive(ya, "y")
    xa, ya = np.broadcast_arrays(xa, ya)
    return _as_output(_kernel_unchecked(kernel, xa, ya), xa.ndim == 0)


def kernel_matrix(kernel: CMKernel, eigenvalues: np.ndarray) -> np.ndarray:
    """G[k, l] = g(lambda_k, lambda_l)."""
    lam = np.asarray(eigenvalues, dtype=float)
    return eval_kernel(kernel, lam[:, None], lam[None, :])


def log_grid(lo: float = DEFAULT_GRID[0], hi: float = DEFAULT_GRID[1],
             points: int = DEFAULT_GRID[2], include_one: bool = True) -> np.ndarray:
    """Sorted log-spaced sample points, with t = 1 added when it falls inside [lo, hi]."""
    grid = np.geomspace(lo, hi, points) if hi > lo else np.array([lo])
    if include_one and lo <= 1.0 <= hi:
        grid = np.union1d(grid, [1.0])
    return grid


def catalog_entries() -> List[dict]:
    """Rows describing the catalog, for listings."""
    rows = [
        {"spec": "sld", "formula": "(1+x)/2", "f0": 0.5, "regular": True, "note": "maximal element"},
        {"spec": "wy", "formula": "(sqrt(x)+1)^2/4", "f0": 0.25, "regular": True, "note": "equals wyd:0.5"},
        {"spec": "wyd:<beta>", "formula": "beta(1-beta)(x-1)^2/((x^beta-1)(x^(1-beta)-1))",
         "f0": "beta(1-beta) for beta in (0,1), else 0", "regular": "beta in (0,1)",
         "note": "beta in [-1,2]; 0 and 1 give km"},
        {"spec": "km", "formula": "(x-1)/ln x", "f0": 0.0, "regular": False, "note": "non-regular metric"},
    ]
    return rows
