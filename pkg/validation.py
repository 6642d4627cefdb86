"""Validation utilities for the monotone-metric uncertainty checks.

Two halves live here.  The first is the exception hierarchy and the small
invariant guards used when states, observables and covariance matrices are
built.  The second is the post-run validation harness: it walks a list of
report records (as produced by :mod:`inequality_suite` and written by
:mod:`cli_harness`) and reports findings that no single check can see on its
own, such as transitivity of the hierarchy chain.
"""

from __future__ import annotations

import logging
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)


HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_FLOOR = 1e-10
PSD_SLACK = 1e-9
SYMMETRY_TOL = 1e-12


class ValidationError(ValueError):
    """Input does not satisfy a documented invariant.

    ``field`` is a path into the offending input (``density[1][0]``,
    ``observables[2]``) and ``invariant`` names the rule that failed.
    """

    def __init__(self, message: str, field: Optional[str] = None, invariant: Optional[str] = None):
        self.field = field
        self.invariant = invariant
        prefix = []
        if invariant:
            prefix.append(invariant)
        if field:
            prefix.append(f"at {field}")
        super().__init__(f"{' '.join(prefix)}: {message}" if prefix else message)


class SchemaError(ValidationError):
    pass


class HermiticityError(ValidationError):
    pass


class TraceError(ValidationError):
    pass


class DimensionMismatchError(ValidationError):
    pass


class ZeroObservableError(ValidationError):
    pass


class StrictPositivityError(ValidationError):
    pass


class DomainError(ValueError):
    """Argument outside the domain of a function (non-positive x, bad beta...)."""


class DominanceViolationError(DomainError):
    """A difference kernel g1 - g2 went negative: the hypothesis g1 >= g2 failed."""


class InternalConsistencyError(RuntimeError):
    """A quantity that is provably well-behaved was not; signals a numerics bug."""


def check_square(matrix: np.ndarray, field: str) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {matrix.shape}",
                              field=field, invariant="square")
    if matrix.shape[0] < 1:
        raise ValidationError("empty matrix", field=field, invariant="square")
    if not np.all(np.isfinite(matrix)):
        k, l = np.argwhere(~np.isfinite(matrix))[0]
        raise ValidationError("non-finite entry", field=f"{field}[{k}][{l}]", invariant="finite")
    return matrix


def check_hermitian(matrix: np.ndarray, field: str, tol: float = HERMITIAN_TOL) -> None:
    """Raise :class:`HermiticityError` naming the worst entry if ``matrix`` is not Hermitian."""
    deviation = np.abs(matrix - matrix.conj().T)
    worst = float(deviation.max())
    if worst > tol:
        k, l = np.unravel_index(int(np.argmax(deviation)), deviation.shape)
        raise HermiticityError(f"|M - M*| = {worst:.3e} exceeds {tol:g}",
                               field=f"{field}[{k}][{l}]", invariant="hermitian")


def check_same_dimension(n_expected: int, matrix: np.ndarray, field: str) -> None:
    if matrix.shape != (n_expected, n_expected):
        raise DimensionMismatchError(
            f"expected {n_expected}x{n_expected}, got {matrix.shape[0]}x{matrix.shape[1]}",
            field=field, invariant="dimension")


def psd_scale(matrix: np.ndarray) -> float:
    return max(1.0, float(np.max(np.abs(matrix)))) if matrix.size else 1.0


# --------------------------------------------------------------------------
# Post-run validation harness
# --------------------------------------------------------------------------

HIERARCHY_ORDER = ("cov>=qcov_s", "qcov_s>=qcov_as", "cov>=qcov_as")


def _record_tol(record: Dict[str, Any]) -> float:
    tol = record.get("tol_det")
    if tol is None:
        tol = 1e-9 * max(1.0, abs(record.get("lhs", 0.0)), abs(record.get("rhs", 0.0)))
    return float(tol)


def validate(records: Sequence[Dict[str, Any]]) -> List[Dict[str, Any]]:
    """Validate a batch of report records.

    Parameters
    ----------
    records:
        Report dictionaries (``InequalityReport.to_dict()`` plus sweep keys
        such as ``trial`` and ``seed``).

    Returns
    -------
    List[Dict[str, Any]]
        Findings.  Each finding is a dictionary with ``rule_name``,
        ``status`` and ``details`` keys.  An empty list means nothing was
        flagged.
    """

    report: List[Dict[str, Any]] = []

    for record in records:
        lhs, rhs, margin = record.get("lhs"), record.get("rhs"), record.get("margin")
        if lhs is None or rhs is None or margin is None:
            continue
        if margin != lhs - rhs:
            report.append({
                "rule_name": "Margin_Consistency",
                "status": "INCONSISTENT",
                "details": f"{record.get('name')} (seed {record.get('seed')}): "
                           f"margin {margin!r} != lhs - rhs {lhs - rhs!r}",
            })
        verdict = record.get("verdict")
        passes = margin >= -_record_tol(record)
        ill = any("ill-conditioned" in w for w in record.get("warnings", []))
        if verdict == "PASS" and not passes and not ill:
            report.append({
                "rule_name": "Verdict_Tolerance",
                "status": "INCONSISTENT",
                "details": f"{record.get('name')} marked PASS with margin {margin:.3e}",
            })
        elif verdict == "FAIL" and passes:
            report.append({
                "rule_name": "Verdict_Tolerance",
                "status": "INCONSISTENT",
                "details": f"{record.get('name')} marked FAIL with margin {margin:.3e}",
            })

    chains: Dict[Any, Dict[str, Dict[str, Any]]] = {}
    for record in records:
        name = record.get("name", "")
        if not name.startswith("hierarchy:"):
            continue
        key = (record.get("seed"), record.get("trial"), record.get("f1"))
        chains.setdefault(key, {})[name.split(":", 1)[1]] = record

    for key, chain in chains.items():
        if not all(step in chain for step in HIERARCHY_ORDER):
            continue
        det_cov = chain["cov>=qcov_s"]["lhs"]
        det_s = chain["qcov_s>=qcov_as"]["lhs"]
        det_as = chain["cov>=qcov_as"]["components"]["det_G2"]
        tol = max(_record_tol(chain[step]) for step in HIERARCHY_ORDER)
        if not (det_cov >= det_s - tol and det_s >= det_as - tol):
            report.append({
                "rule_name": "Hierarchy_Transitivity",
                "status": "CONFLICT",
                "details": f"seed {key[0]} f={key[2]}: det_Cov={det_cov:.6e}, "
                           f"det_s={det_s:.6e}, det_as={det_as:.6e}",
            })

    if report:
        logger.warning("validation harness raised %d finding(s)", len(report))
    return report


def erratum_evidence(records: Iterable[Dict[str, Any]]) -> Optional[Dict[str, Any]]:
    """First record where the printed remainder fails while the proof remainder passes."""
    for record in records:
        if record.get("verdict") != "PASS":
            continue
        margin_printed = record.get("margin_printed")
        if margin_printed is None:
            continue
        if margin_printed < -_record_tol(record):
            return record
    return None
