import numpy as np
import pytest

from monotone_functions import (
    CATALOG,
    CLASSICAL,
    KUBO_MORI,
    SLD,
    WY,
    Family,
    FopSpec,
    KernelKind,
    apply_f_matrix,
    asymmetric_kernel,
    catalog_entries,
    custom_kernel,
    difference_kernel,
    eval_f,
    eval_kernel,
    f_zero,
    inverse_mean_kernel,
    is_regular,
    kernel_matrix,
    log_grid,
    mean_mf,
    parse_kernel,
    parse_spec,
    symmetric_kernel,
    wyd,
)
from validation import DomainError, DominanceViolationError, ValidationError


def test_closed_forms():
    assert eval_f(SLD, 3.0) == pytest.approx(2.0)
    assert eval_f(WY, 4.0) == pytest.approx(9.0 / 4.0)
    assert eval_f(KUBO_MORI, np.e) == pytest.approx(np.e - 1.0)
    # beta = 2 reduces to 2x / (1 + x)
    assert eval_f(wyd(2.0), 4.0) == pytest.approx(8.0 / 5.0)
    assert eval_f(wyd(-1.0), 4.0) == pytest.approx(8.0 / 5.0)


def test_wyd_half_is_wigner_yanase():
    t = log_grid(1e-4, 1e4, 50)
    np.testing.assert_allclose(eval_f(wyd(0.5), t), eval_f(WY, t), rtol=1e-12)


def test_wyd_endpoints_are_kubo_mori():
    t = np.array([0.01, 0.5, 2.0, 30.0])
    np.testing.assert_allclose(eval_f(wyd(0.0), t), eval_f(KUBO_MORI, t), rtol=1e-14)
    np.testing.assert_allclose(eval_f(wyd(1.0), t), eval_f(KUBO_MORI, t), rtol=1e-14)
    assert wyd(1.0).is_kubo_mori_limit


@pytest.mark.parametrize("spec", CATALOG, ids=lambda s: s.label)
def test_normalised_and_symmetric(spec):
    assert eval_f(spec, 1.0) == pytest.approx(1.0, abs=1e-14)
    t = log_grid(1e-6, 1e6, 200)
    lhs = eval_f(spec, t)
    rhs = t * eval_f(spec, 1.0 / t)
    assert np.all(np.abs(lhs - rhs) <= 1e-12 * np.maximum(1.0, np.abs(lhs)))


@pytest.mark.parametrize("spec", CATALOG, ids=lambda s: s.label)
def test_nondecreasing_and_bounded_by_sld(spec):
    t = log_grid(1e-6, 1e6, 200)
    values = eval_f(spec, t)
    assert np.all(np.diff(values) >= -1e-12 * np.maximum(1.0, values[1:]))
    assert np.all(values <= eval_f(SLD, t) * (1 + 1e-12))


@pytest.mark.parametrize("spec", [s for s in CATALOG if s != KUBO_MORI], ids=lambda s: s.label)
def test_f_zero_matches_limit(spec):
    assert eval_f(spec, 1e-20) == pytest.approx(f_zero(spec), abs=1e-5)


def test_kubo_mori_decays_logarithmically():
    # (x - 1) / ln x ~ 1 / |ln x| as x -> 0
    assert eval_f(KUBO_MORI, 1e-300) == pytest.approx(1.0 / (300 * np.log(10)), rel=1e-6)


def test_f_zero_values():
    assert f_zero(SLD) == 0.5
    assert f_zero(WY) == 0.25
    assert f_zero(wyd(0.3)) == pytest.approx(0.21)
    assert f_zero(KUBO_MORI) == 0.0
    assert f_zero(wyd(1.5)) == 0.0
    assert not is_regular(KUBO_MORI)
    assert is_regular(wyd(0.5))


def test_kubo_mori_near_one_is_stable():
    values = eval_f(KUBO_MORI, np.array([1 - 1e-9, 1.0, 1 + 1e-9]))
    np.testing.assert_allclose(values, [1.0, 1.0, 1.0], atol=1e-9)


def test_domain_errors():
    with pytest.raises(DomainError):
        eval_f(SLD, 0.0)
    with pytest.raises(DomainError):
        eval_f(WY, np.array([1.0, -2.0]))
    with pytest.raises(DomainError):
        wyd(2.5)
    with pytest.raises(DomainError):
        FopSpec(Family.SLD, beta=0.3)


def test_parse_spec():
    assert parse_spec("sld") == SLD
    assert parse_spec(" WY ") == WY
    assert parse_spec("wyd:0.3") == wyd(0.3)
    assert parse_spec("km") == KUBO_MORI
    for bad in ("foo", "wyd", "wyd:x", "wyd:3", "sld:1"):
        with pytest.raises(ValidationError):
            parse_spec(bad)


def test_mean_properties():
    assert mean_mf(SLD, 2.0, 4.0) == pytest.approx(3.0)
    assert mean_mf(WY, 1.0, 9.0) == pytest.approx(4.0)
    assert mean_mf(KUBO_MORI, 1.0, np.e) == pytest.approx(np.e - 1.0)
    assert mean_mf(KUBO_MORI, 2.0, 2.0 * (1 + 1e-10)) == pytest.approx(2.0, rel=1e-9)
    x, y = 0.37, 5.2
    for spec in CATALOG:
        assert mean_mf(spec, x, y) == pytest.approx(mean_mf(spec, y, x), rel=1e-13)
        assert mean_mf(spec, x, x) == pytest.approx(x, rel=1e-13)
        assert mean_mf(spec, 3 * x, 3 * y) == pytest.approx(3 * mean_mf(spec, x, y), rel=1e-12)


def test_apply_f_matrix_matches_spectral_definition():
    A = np.array([[2.0, 1.0j], [-1.0j, 3.0]])
    eigenvalues, vectors = np.linalg.eigh(A)
    expected = vectors @ np.diag(eval_f(WY, eigenvalues)) @ vectors.conj().T
    np.testing.assert_allclose(apply_f_matrix(WY, A), expected, atol=1e-12)
    # SLD is affine
    np.testing.assert_allclose(apply_f_matrix(SLD, A), (np.eye(2) + A) / 2, atol=1e-12)


def test_apply_f_matrix_is_operator_monotone_on_a_sample():
    A = np.diag([1.0, 2.0])
    B = A + np.array([[0.5, 0.2], [0.2, 0.3]])
    for spec in CATALOG:
        gap = apply_f_matrix(spec, B) - apply_f_matrix(spec, A)
        assert np.linalg.eigvalsh(gap).min() >= -1e-12


def test_kernel_hierarchy_on_grid():
    t = log_grid(1e-6, 1e6, 200, include_one=False)
    x, y = t[:, None], t[None, :]
    cl = eval_kernel(CLASSICAL, x, y)
    for spec in CATALOG:
        s = eval_kernel(symmetric_kernel(spec), x, y)
        a = eval_kernel(asymmetric_kernel(spec), x, y)
        scale = np.maximum(1.0, cl)
        assert np.all(cl - s >= -1e-12 * scale)
        assert np.all(s - a >= -1e-12 * scale)
        assert np.all(a >= 0.0)


def test_symmetric_sld_kernel_is_classical():
    t = log_grid(1e-3, 1e3, 40)
    x, y = t[:, None], t[None, :]
    np.testing.assert_allclose(eval_kernel(symmetric_kernel(SLD), x, y), eval_kernel(CLASSICAL, x, y),
                               rtol=1e-14)


def test_kernel_values():
    assert eval_kernel(asymmetric_kernel(SLD), 0.7, 0.3) == pytest.approx(0.08)
    assert eval_kernel(asymmetric_kernel(SLD), 0.5, 0.5) == 0.0
    assert eval_kernel(inverse_mean_kernel(SLD), 0.7, 0.3) == pytest.approx(2.0)
    assert eval_kernel(symmetric_kernel(KUBO_MORI), 0.2, 0.9) == 0.0


def test_kernel_matrix_shape_and_symmetry():
    G = kernel_matrix(asymmetric_kernel(WY), np.array([0.5, 0.3, 0.2]))
    assert G.shape == (3, 3)
    np.testing.assert_allclose(G, G.T)
    np.testing.assert_allclose(np.diag(G), 0.0)


def test_difference_kernel():
    diff = difference_kernel(CLASSICAL, asymmetric_kernel(SLD))
    assert eval_kernel(diff, 0.7, 0.3) == pytest.approx(0.5 - 0.08)
    assert diff.label == "(cl)-(as:sld)"
    reversed_diff = difference_kernel(asymmetric_kernel(SLD), CLASSICAL)
    with pytest.raises(DominanceViolationError, match="0.7"):
        eval_kernel(reversed_diff, 0.7, 0.3)


def test_custom_kernel_checks():
    geometric = custom_kernel(lambda x, y: np.sqrt(x * y), "geometric")
    assert eval_kernel(geometric, 4.0, 9.0) == pytest.approx(6.0)
    assert geometric.kind is KernelKind.CUSTOM
    with pytest.raises(ValidationError):
        custom_kernel(lambda x, y: x, "lopsided")
    with pytest.raises(ValidationError):
        custom_kernel(lambda x, y: -(x + y), "negative")


def test_parse_kernel():
    assert parse_kernel("cl") == CLASSICAL
    assert parse_kernel("as:wy") == asymmetric_kernel(WY)
    assert parse_kernel("s:wyd:0.3") == symmetric_kernel(wyd(0.3))
    assert parse_kernel("inv:km").label == "inv:km"
    with pytest.raises(ValidationError):
        parse_kernel("as")
    with pytest.raises(ValidationError):
        parse_kernel("x:sld")


def test_log_grid_contains_one():
    grid = log_grid(1e-6, 1e6, 200)
    assert 1.0 in grid
    assert grid[0] == pytest.approx(1e-6)
    assert np.all(np.diff(grid) > 0)


def test_catalog_entries():
    rows = {row["spec"]: row for row in catalog_entries()}
    assert rows["sld"]["f0"] == 0.5
    assert rows["km"]["regular"] is False
    assert "wyd:<beta>" in rows


@pytest.mark.parametrize("beta", [2.0, -1.0, 1.5, 0.3])
def test_wyd_is_finite_for_huge_arguments(beta):
    spec = wyd(beta)
    x = np.array([1e100, 1e200, 1e300])
    values = eval_f(spec, x)
    assert np.all(np.isfinite(values)) and np.all(values > 0)
    assert np.all(np.diff(values) >= -1e-12 * values[1:])
    np.testing.assert_allclose(values, x * eval_f(spec, 1.0 / x), rtol=1e-9)


def test_wyd_beta_two_tends_to_two():
    # 2x / (1 + x) -> 2
    assert eval_f(wyd(2.0), 1e200) == pytest.approx(2.0)
    assert eval_f(wyd(-1.0), 1e300) == pytest.approx(2.0)
    assert 0.0 <= eval_f(wyd(2.0), 1e-300) < 1e-299


@pytest.mark.parametrize("beta", [1e-6, 1.0 - 1e-6])
def test_wyd_is_continuous_at_the_kubo_mori_endpoints(beta):
    t = log_grid(1e-3, 1e3, 60)
    np.testing.assert_allclose(eval_f(wyd(beta), t), eval_f(KUBO_MORI, t), rtol=1e-4)


@pytest.mark.parametrize("spec", [s for s in CATALOG if is_regular(s)], ids=lambda s: s.label)
def test_symmetric_to_asymmetric_kernel_ratio(spec):
    rng = np.random.default_rng(7)
    x = 10.0 ** rng.uniform(-3, 3, 500)
    y = 10.0 ** rng.uniform(-3, 3, 500)
    keep = np.abs(x - y) > 1e-6 * np.maximum(x, y)
    x, y = x[keep], y[keep]
    ratio = eval_kernel(symmetric_kernel(spec), x, y) / eval_kernel(asymmetric_kernel(spec), x, y)
    np.testing.assert_allclose(ratio, (x + y) ** 2 / (x - y) ** 2, rtol=1e-10)


@pytest.mark.parametrize("seed", range(25))
def test_apply_f_matrix_is_operator_monotone_on_random_pairs(seed):
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    H = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    A = G @ G.conj().T + 0.1 * np.eye(2)
    B = A + H @ H.conj().T
    for spec in CATALOG:
        upper = apply_f_matrix(spec, B)
        gap = upper - apply_f_matrix(spec, A)
        gap = (gap + gap.conj().T) / 2
        assert np.linalg.eigvalsh(gap).min() >= -1e-10 * max(1.0, np.abs(upper).max()), spec.label
