"""
Determinant uncertainty inequalities
====================================
Checks, on a given state D and observable tuple, every determinant
inequality of the monotone-metric uncertainty theory:

* the main inequality  det G1 >= det G2 + det(G1 - G2) + R  for kernels
  g1 >= g2, with R the binomial cross terms of the Minkowski step
  (base det G2; the det G1 variant is recorded for comparison),
* the covariance hierarchy  det Cov >= det qCov^s_f >= det qCov^as_f,
* the comparison theorem between two functions ordered by f(0)/f(t),
* the cross theorem with the factor (t + 1)^2 / (t - 1)^2,
* the Robertson (and, for N = 2, Schroedinger) commutator bound.

Pointwise hypotheses are sampled, never proven; reports say so.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import scipy.linalg
from scipy.special import comb

from covariance_engine import (
    CovarianceKind,
    CovarianceMatrix,
    commutator_bound_matrix,
    cov_matrix,
)
from monotone_functions import (
    CLASSICAL,
    CMKernel,
    FopSpec,
    KernelKind,
    asymmetric_kernel,
    eval_f,
    eval_kernel,
    f_zero,
    log_grid,
    symmetric_kernel,
)
from quantum_states import DensityMatrix, ObservableTuple
from validation import DomainError, InternalConsistencyError, ValidationError, psd_scale
from versioning import instance_digest

logger = logging.getLogger(__name__)

DET_TOL = 1e-9
DIFFERENCE_PSD_TOL = 1e-8
ILL_CONDITIONED = 1e12
NEGATIVE_DET_CLAMP = 1e-12
CROSS_WINDOW = 1e-6
MINKOWSKI_TOL = 1e-9
HYPOTHESIS_TOL = 1e-12
# eigenvalues within this fraction of the largest one count as zero
SINGULAR_RTOL = 1.0 / ILL_CONDITIONED


class Verdict(enum.Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    HYPOTHESIS_NOT_MET = "HYPOTHESIS_NOT_MET"


class Direction(enum.Enum):
    AS_GEQ_S = "as-geq-s"
    S_GEQ_AS = "s-geq-as"


@dataclass(frozen=True)
class HypothesisGrid:
    """Log grid for sampling "for all t > 0" hypotheses."""

    points: int = 200
    lo: float = 1e-6
    hi: float = 1e6
    tol: float = HYPOTHESIS_TOL


@dataclass(frozen=True)
class HypothesisReport:
    name: str
    passed: bool
    min_margin: float
    witness: Dict[str, float]
    points: int
    notes: Tuple[str, ...] = ()
    sampled: bool = True

    def to_dict(self) -> Dict[str, Any]:
        payload = asdict(self)
        payload["notes"] = list(self.notes)
        return payload


@dataclass(frozen=True)
class InequalityReport:
    name: str
    lhs: float
    rhs: float
    margin: float
    tol_det: float
    verdict: Verdict
    hypothesis_ok: bool = True
    hypothesis: Optional[Dict[str, Any]] = None
    remainder: Optional[float] = None
    remainder_printed: Optional[float] = None
    rhs_printed: Optional[float] = None
    margin_printed: Optional[float] = None
    components: Dict[str, Any] = field(default_factory=dict)
    instance: Dict[str, Any] = field(default_factory=dict)
    f1: str = ""
    f2: str = ""
    warnings: Tuple[str, ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        payload = asdict(self)
        payload["verdict"] = self.verdict.value
        payload["warnings"] = list(self.warnings)
        return payload


@dataclass(frozen=True)
class MinkowskiReport:
    lhs: float
    rhs: float
    margin: float
    passed: bool
    N: int


def tolerance(lhs: float, rhs: float, tol_det: float = DET_TOL) -> float:
    return tol_det * max(1.0, abs(lhs), abs(rhs))


def _verdict(margin: float, tol: float, hypothesis_ok: bool, ill_conditioned: bool,
             warnings: List[str]) -> Verdict:
    if not hypothesis_ok:
        return Verdict.HYPOTHESIS_NOT_MET
    if margin >= -tol:
        return Verdict.PASS
    if ill_conditioned:
        warnings.append("WARN: ill-conditioned, margin below tolerance")
        return Verdict.PASS
    return Verdict.FAIL


def _instance(D: DensityMatrix, obs: ObservableTuple, seed: Optional[int]) -> Dict[str, Any]:
    return {
        "n": D.n,
        "N": len(obs),
        "seed": seed,
        "digest": instance_digest(D.entries, [A.entries for A in obs]),
    }


def _clamp_det(value: float, scale: float, N: int, warnings: List[str], what: str) -> float:
    if value >= 0.0:
        return value
    if value < -NEGATIVE_DET_CLAMP * scale ** N:
        warnings.append(f"negative determinant {what} = {value:.3e} clamped to 0")
    return 0.0


def _nth_root(value: float, N: int) -> float:
    return value ** (1.0 / N)


def _spectral_scale(*matrices: np.ndarray) -> float:
    return max(float(np.max(np.abs(scipy.linalg.eigvalsh(M)), initial=0.0)) for M in matrices)


def _rank_aware_det(matrix: np.ndarray, spectral_scale: float) -> float:
    """det as the product of eigenvalues; exactly 0 for a numerically singular matrix."""
    eigenvalues = scipy.linalg.eigvalsh(matrix)
    if np.min(np.abs(eigenvalues)) <= SINGULAR_RTOL * spectral_scale:
        return 0.0
    return float(np.prod(eigenvalues))


def remainder_R(det_base: float, det_diff: float, N: int) -> float:
    """sum_{k=1}^{N-1} C(N, k) det_base^{k/N} det_diff^{(N-k)/N}."""
    if isinstance(N, bool) or int(N) != N or N < 1:
        raise DomainError(f"N must be a positive integer, got {N}")
    if det_base < 0 or det_diff < 0:
        raise DomainError(f"determinants must be nonnegative, got {det_base}, {det_diff}")
    N = int(N)
    return float(sum(comb(N, k, exact=True) * det_base ** (k / N) * det_diff ** ((N - k) / N)
                     for k in range(1, N)))


def minkowski_check(P: np.ndarray, Q: np.ndarray, tol: float = MINKOWSKI_TOL) -> MinkowskiReport:
    """det(P + Q)^{1/N} >= det(P)^{1/N} + det(Q)^{1/N} for real symmetric PSD P, Q."""
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape != Q.shape:
        raise ValidationError(f"expected two square matrices of one size, got {P.shape} and {Q.shape}",
                              invariant="square")
    scale = max(psd_scale(P), psd_scale(Q))
    for name, M in (("P", P), ("Q", Q)):
        if np.any(np.abs(M - M.T) > 1e-12 * scale):
            raise ValidationError("matrix is not symmetric", field=name, invariant="symmetric")
        smallest = float(scipy.linalg.eigvalsh(M)[0])
        if smallest < -MINKOWSKI_TOL * scale:
            raise DomainError(f"{name} is not positive semidefinite (eigenvalue {smallest:.3e})")
    N = P.shape[0]
    ignored: List[str] = []
    spectral_scale = _spectral_scale(P + Q, P, Q)
    roots = [_nth_root(_clamp_det(_rank_aware_det(M, spectral_scale), scale, N, ignored, name), N)
             for name, M in (("P+Q", P + Q), ("P", P), ("Q", Q))]
    lhs, rhs = roots[0], roots[1] + roots[2]
    margin = lhs - rhs
    return MinkowskiReport(lhs, rhs, margin, margin >= -tol * max(scale, lhs, rhs), N)


# --------------------------------------------------------------------------
# Hypothesis sampling
# --------------------------------------------------------------------------

def sample_kernel_dominance(g1: CMKernel, g2: CMKernel, spectrum: np.ndarray,
                            grid: HypothesisGrid = HypothesisGrid()) -> Tuple[HypothesisReport, bool]:
    """Sample g1 >= g2 on all spectrum pairs and a log grid over the spectrum's range.

    Returns the report and whether the spectrum pairs alone passed.
    """
    lam = np.asarray(spectrum, dtype=float)
    pts = log_grid(lam.min(), lam.max(), grid.points, include_one=False)
    results = []
    for x, y in ((lam[:, None], lam[None, :]), (pts[:, None], pts[None, :])):
        upper = eval_kernel(g1, x, y)
        lower = eval_kernel(g2, x, y)
        margin = upper - lower
        scaled = margin / np.maximum(1.0, np.abs(upper))
        idx = np.unravel_index(int(np.argmin(scaled)), scaled.shape)
        xs, ys = np.broadcast_arrays(x, y)
        results.append((float(scaled[idx]), float(margin[idx]), float(xs[idx]), float(ys[idx]),
                        margin.size))
    spectrum_ok = results[0][0] >= -grid.tol
    worst = min(results, key=lambda item: item[0])
    passed = spectrum_ok and results[1][0] >= -grid.tol
    report = HypothesisReport(
        name=f"{g1.label} >= {g2.label}",
        passed=passed,
        min_margin=worst[1],
        witness={"x": worst[2], "y": worst[3]},
        points=results[0][4] + results[1][4],
        notes=("sampled on spectrum pairs and a log grid over [lambda_min, lambda_max]",),
    )
    logger.debug("kernel dominance %s: passed=%s min_margin=%.3e", report.name, passed, worst[1])
    return report, spectrum_ok


def check_fop_ordering(f1: FopSpec, f2: FopSpec,
                       grid: HypothesisGrid = HypothesisGrid()) -> HypothesisReport:
    """Sample f1(0)/f1(t) >= f2(0)/f2(t) over a log grid in t."""
    t = log_grid(grid.lo, grid.hi, grid.points)
    margin = f_zero(f1) / eval_f(f1, t) - f_zero(f2) / eval_f(f2, t)
    idx = int(np.argmin(margin))
    return HypothesisReport(
        name=f"f(0)/f(t): {f1.label} >= {f2.label}",
        passed=bool(margin[idx] >= -grid.tol),
        min_margin=float(margin[idx]),
        witness={"t": float(t[idx])},
        points=int(t.size),
    )


def _cross_hypothesis(f1: FopSpec, f2: FopSpec, direction: Direction,
                      grid: HypothesisGrid) -> HypothesisReport:
    t = log_grid(grid.lo, grid.hi, grid.points, include_one=False)
    t = t[np.abs(t - 1.0) >= CROSS_WINDOW]
    r1 = f_zero(f1) / eval_f(f1, t)
    r2 = f_zero(f2) / eval_f(f2, t)
    factor = (t + 1.0) ** 2 / (t - 1.0) ** 2
    if direction is Direction.AS_GEQ_S:
        # g^as_{f1} >= g^s_{f2}
        lhs, rhs = r1, r2 * factor
        printed_lhs, printed_rhs = lhs, rhs
        window_ok = f_zero(f2) == 0.0
        window_note = "at x = y the kernel check needs g^s_{f2}(x, x) = 2 f2(0) x <= 0, i.e. f2(0) = 0"
    else:
        # g^s_{f1} >= g^as_{f2}
        lhs, rhs = r1 * factor, r2
        printed_lhs, printed_rhs = r2 * factor, r1
        window_ok = True
        window_note = "at x = y g^as_{f2} vanishes, so the kernel inequality holds there"
    scale = np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
    scaled = (lhs - rhs) / scale
    printed_ok = bool(np.all((printed_lhs - printed_rhs) >= -grid.tol * scale))
    idx = int(np.argmin(scaled))
    sampled_ok = bool(scaled[idx] >= -grid.tol)
    return HypothesisReport(
        name=f"cross {direction.value}: {f1.label}, {f2.label}",
        passed=sampled_ok and window_ok,
        min_margin=float(lhs[idx] - rhs[idx]),
        witness={"t": float(t[idx]), "divergence_window": CROSS_WINDOW,
                 "window_ok": window_ok, "printed_hypothesis_ok": printed_ok},
        points=int(t.size),
        notes=(window_note,),
    )


# --------------------------------------------------------------------------
# Checks
# --------------------------------------------------------------------------

def _kernel_matrix(D: DensityMatrix, obs: ObservableTuple, g: CMKernel) -> CovarianceMatrix:
    kinds = {
        KernelKind.CLASSICAL: CovarianceKind.CLASSICAL,
        KernelKind.SYMMETRIC_F: CovarianceKind.SYMMETRIC_F,
        KernelKind.ASYMMETRIC_F: CovarianceKind.ASYMMETRIC_F,
    }
    kind = kinds.get(g.kind, CovarianceKind.GENERIC_G)
    if kind is CovarianceKind.GENERIC_G:
        return cov_matrix(D, obs, kind, kernel=g)
    return cov_matrix(D, obs, kind, f=g.f)


def _non_regular(*kernels: CMKernel) -> List[str]:
    notes = []
    for g in kernels:
        if g.kind in (KernelKind.SYMMETRIC_F, KernelKind.ASYMMETRIC_F) and f_zero(g.f) == 0.0:
            notes.append(f"non-regular metric: {g.f.label} has f(0) = 0, {g.label} vanishes")
    return notes


def check_main_inequality(D: DensityMatrix, g1: CMKernel, g2: CMKernel, obs: ObservableTuple,
                          grid: HypothesisGrid = HypothesisGrid(), tol_det: float = DET_TOL,
                          name: str = "main", seed: Optional[int] = None) -> InequalityReport:
    """det G1 >= det G2 + det(G1 - G2) + R(det G2, det(G1 - G2), N)."""
    hypothesis, spectrum_ok = sample_kernel_dominance(g1, g2, D.eigenvalues, grid)
    warnings = _non_regular(g1, g2)

    G1 = _kernel_matrix(D, obs, g1)
    G2 = _kernel_matrix(D, obs, g2)
    difference = G1.entries - G2.entries
    N = len(obs)
    scale = max(psd_scale(G1.entries), psd_scale(G2.entries))
    min_eig_difference = float(scipy.linalg.eigvalsh(difference)[0])
    if spectrum_ok and min_eig_difference < -DIFFERENCE_PSD_TOL * scale:
        raise InternalConsistencyError(
            f"{g1.label} >= {g2.label} holds on the spectrum but G1 - G2 has eigenvalue "
            f"{min_eig_difference:.3e}")

    spectral_scale = _spectral_scale(G1.entries, G2.entries)
    det_G1 = _rank_aware_det(G1.entries, spectral_scale)
    det_G2 = _rank_aware_det(G2.entries, spectral_scale)
    det_difference = _rank_aware_det(difference, spectral_scale)
    base = _clamp_det(det_G2, scale, N, warnings, "det G2")
    diff = _clamp_det(det_difference, scale, N, warnings, "det(G1 - G2)")
    top = _clamp_det(det_G1, scale, N, warnings, "det G1")

    remainder = remainder_R(base, diff, N)
    lhs = det_G1
    rhs = det_G2 + det_difference + remainder
    margin = lhs - rhs

    remainder_printed = remainder_R(top, diff, N)
    rhs_printed = det_G2 + det_difference + remainder_printed

    minkowski_lhs = _nth_root(top, N)
    minkowski_rhs = _nth_root(base, N) + _nth_root(diff, N)

    condition = G1.condition_number()
    # an identically zero G1 (non-regular f) makes both sides 0
    ill_conditioned = condition > ILL_CONDITIONED and bool(np.any(G1.entries))
    if ill_conditioned:
        warnings.append(f"ill-conditioned: cond(G1) = {condition:.3e}")
        logger.warning("%s: G1 is ill-conditioned (cond %.3e)", name, condition)

    tol = tolerance(lhs, rhs, tol_det)
    verdict = _verdict(margin, tol, hypothesis.passed, ill_conditioned, warnings)
    minkowski_margin = minkowski_lhs - minkowski_rhs
    if verdict is Verdict.PASS and minkowski_margin < -MINKOWSKI_TOL * max(1.0, minkowski_lhs):
        warnings.append(f"Minkowski step margin {minkowski_margin:.3e} below tolerance")

    components = {
        "det_G1": det_G1,
        "det_G2": det_G2,
        "det_G1_minus_G2": det_difference,
        "min_eig_G1": G1.min_eigenvalue(),
        "min_eig_G2": G2.min_eigenvalue(),
        "min_eig_G1_minus_G2": min_eig_difference,
        "cond_G1": condition if np.isfinite(condition) else None,
        "minkowski_lhs": minkowski_lhs,
        "minkowski_rhs": minkowski_rhs,
        "minkowski_margin": minkowski_margin,
    }
    logger.debug("%s [%s vs %s]: lhs=%.6e rhs=%.6e margin=%.3e", name, g1.label, g2.label, lhs, rhs, margin)
    return InequalityReport(
        name=name,
        lhs=lhs,
        rhs=rhs,
        margin=margin,
        tol_det=tol,
        verdict=verdict,
        hypothesis_ok=hypothesis.passed,
        hypothesis=hypothesis.to_dict(),
        remainder=remainder,
        remainder_printed=remainder_printed,
        rhs_printed=rhs_printed,
        margin_printed=lhs - rhs_printed,
        components=components,
        instance=_instance(D, obs, seed),
        f1=g1.label,
        f2=g2.label,
        warnings=tuple(warnings),
    )


def check_hierarchy(D: DensityMatrix, f: FopSpec, obs: ObservableTuple,
                    grid: HypothesisGrid = HypothesisGrid(), tol_det: float = DET_TOL,
                    seed: Optional[int] = None) -> List[InequalityReport]:
    """det Cov >= det qCov^s_f >= det qCov^as_f, plus det Cov >= det qCov^as_f."""
    g_s = symmetric_kernel(f)
    g_as = asymmetric_kernel(f)
    pairs = (
        ("cov>=qcov_s", CLASSICAL, g_s),
        ("qcov_s>=qcov_as", g_s, g_as),
        ("cov>=qcov_as", CLASSICAL, g_as),
    )
    reports = []
    for step, g1, g2 in pairs:
        report = check_main_inequality(D, g1, g2, obs, grid, tol_det, name=f"hierarchy:{step}", seed=seed)
        reports.append(replace(report, f1=f.label, f2=""))
    return reports


def _with_function_hypothesis(report: InequalityReport, hypothesis: HypothesisReport,
                              f1: FopSpec, f2: FopSpec) -> InequalityReport:
    passed = hypothesis.passed and report.hypothesis_ok
    warnings = [w for w in report.warnings if not w.startswith("WARN:")]
    ill = any(w.startswith("ill-conditioned") for w in warnings)
    verdict = _verdict(report.margin, report.tol_det, passed, ill, warnings)
    return replace(
        report,
        hypothesis_ok=passed,
        hypothesis={"function_level": hypothesis.to_dict(), "kernel_level": report.hypothesis},
        verdict=verdict,
        f1=f1.label,
        f2=f2.label,
        warnings=tuple(warnings),
    )


def check_cross_theorem(f1: FopSpec, f2: FopSpec, D: DensityMatrix, obs: ObservableTuple,
                        direction: Direction = Direction.AS_GEQ_S,
                        grid: HypothesisGrid = HypothesisGrid(), tol_det: float = DET_TOL,
                        seed: Optional[int] = None) -> InequalityReport:
    """det qCov^as_{f1} >= det qCov^s_{f2} (AS_GEQ_S) or det qCov^s_{f1} >= det qCov^as_{f2} (S_GEQ_AS)."""
    hypothesis = _cross_hypothesis(f1, f2, direction, grid)
    if direction is Direction.AS_GEQ_S:
        g1, g2 = asymmetric_kernel(f1), symmetric_kernel(f2)
    else:
        g1, g2 = symmetric_kernel(f1), asymmetric_kernel(f2)
    report = check_main_inequality(D, g1, g2, obs, grid, tol_det,
                                   name=f"cross:{direction.value}", seed=seed)
    return _with_function_hypothesis(report, hypothesis, f1, f2)


def check_ordering_theorem(D: DensityMatrix, f1: FopSpec, f2: FopSpec, obs: ObservableTuple,
                           grid: HypothesisGrid = HypothesisGrid(), tol_det: float = DET_TOL,
                           seed: Optional[int] = None) -> List[InequalityReport]:
    """All covariance comparisons implied by f1(0)/f1(t) >= f2(0)/f2(t)."""
    ordering = check_fop_ordering(f1, f2, grid)
    reports = []
    for f in (f1, f2):
        g_s, g_as = symmetric_kernel(f), asymmetric_kernel(f)
        for step, g1, g2 in (("cov>=qcov_as", CLASSICAL, g_as),
                             ("cov>=qcov_s", CLASSICAL, g_s),
                             ("qcov_s>=qcov_as", g_s, g_as)):
            report = check_main_inequality(D, g1, g2, obs, grid, tol_det,
                                           name=f"ordering:{step}[{f.label}]", seed=seed)
            reports.append(replace(report, f1=f.label, f2=""))
    for step, g1 in (("qcov_as[f1]>=qcov_as[f2]", asymmetric_kernel(f1)),
                     ("qcov_s[f1]>=qcov_as[f2]", symmetric_kernel(f1))):
        report = check_main_inequality(D, g1, asymmetric_kernel(f2), obs, grid, tol_det,
                                       name=f"ordering:{step}", seed=seed)
        reports.append(_with_function_hypothesis(report, ordering, f1, f2))
    return reports


def check_robertson_schrodinger(D: DensityMatrix, obs: ObservableTuple, tol_det: float = DET_TOL,
                                seed: Optional[int] = None) -> InequalityReport:
    """det(Cov) >= det(-(i/2) Tr(D [A_h, A_j])); the Schroedinger relation when N = 2."""
    covariance = cov_matrix(D, obs, CovarianceKind.CLASSICAL)
    bound = commutator_bound_matrix(D, obs)
    lhs = covariance.det()
    rhs = bound.det()
    margin = lhs - rhs
    components: Dict[str, Any] = {"det_cov": lhs, "det_commutator": rhs}
    if len(obs) == 2:
        var_a, var_b = covariance.entries[0, 0], covariance.entries[1, 1]
        commutator_term = bound.entries[0, 1] ** 2
        components.update({
            "var_a": float(var_a),
            "var_b": float(var_b),
            "cov_ab": float(covariance.entries[0, 1]),
            "var_product": float(var_a * var_b),
            "cov_squared": float(covariance.entries[0, 1] ** 2),
            "commutator_term": float(commutator_term),
            "robertson_1929_margin": float(var_a * var_b - commutator_term),
        })
    warnings: List[str] = []
    condition = covariance.condition_number()
    ill_conditioned = condition > ILL_CONDITIONED
    if ill_conditioned:
        warnings.append(f"ill-conditioned: cond(Cov) = {condition:.3e}")
    tol = tolerance(lhs, rhs, tol_det)
    verdict = _verdict(margin, tol, True, ill_conditioned, warnings)
    return InequalityReport(
        name="schrodinger" if len(obs) == 2 else "robertson",
        lhs=lhs,
        rhs=rhs,
        margin=margin,
        tol_det=tol,
        verdict=verdict,
        components=components,
        instance=_instance(D, obs, seed),
        f1="cl",
        f2="commutator",
        warnings=tuple(warnings),
    )


def check_schrodinger(D: DensityMatrix, obs: ObservableTuple, tol_det: float = DET_TOL,
                      seed: Optional[int] = None) -> InequalityReport:
    if len(obs) != 2:
        raise ValidationError(f"the Schroedinger relation takes exactly 2 observables, got {len(obs)}",
                              field="observables", invariant="pair")
    return check_robertson_schrodinger(D, obs, tol_det, seed)
