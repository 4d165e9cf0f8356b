import numpy as np
import numpy.testing as npt
import pytest

from nysadmm.errors import SketchFactorizationError, ValidationError
from nysadmm.linops import SymmetricPsdOperator, gram_operator
from nysadmm.nystrom import (
    AdaptiveConfig,
    SketchConfig,
    adaptive_nystrom_approx,
    effective_dimension,
    rand_nystrom_approx,
    theoretical_sketch_size,
)

from oracles import counting_matvec, dense_from_operator, effective_dimension_dense


def diag_operator(diag):
    diag = np.asarray(diag, dtype=np.float64)
    return SymmetricPsdOperator(diag.size, lambda v: diag * v)


def psd_operator_from_spectrum(eigvals, seed):
    """Random orthogonal conjugation of a given spectrum."""
    rng = np.random.default_rng(seed)
    d = len(eigvals)
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    h = (q * np.asarray(eigvals)) @ q.T
    h = 0.5 * (h + h.T)
    return SymmetricPsdOperator(d, lambda v: h @ v), h


def approx_dense(approx):
    return (approx.u * approx.eigs) @ approx.u.T


def test_identity_operator_recovered():
    op = diag_operator(np.ones(20))
    approx = rand_nystrom_approx(op, SketchConfig(s=8, seed=0))
    npt.assert_allclose(approx.eigs, np.ones(8), atol=1e-10)
    assert approx.shift <= 1e-12
    assert not approx.rank_capped


def test_low_rank_operator_recovered_exactly():
    # rank 5 spectrum sketched with s=10: recovery to roundoff
    eigvals = np.concatenate([np.array([5.0, 4.0, 3.0, 2.0, 1.0]), np.zeros(25)])
    op, h = psd_operator_from_spectrum(eigvals, seed=1)
    approx = rand_nystrom_approx(op, SketchConfig(s=10, seed=2))
    err = np.linalg.norm(h - approx_dense(approx), 2)
    assert err <= 1e-8 * np.linalg.norm(h, 2)


def test_geometric_spectrum_error_near_optimal():
    # best rank-20 error is the 21st eigenvalue; the sketch stays within 10x
    lam = 2.0 ** -np.arange(1, 51)
    op = diag_operator(lam)
    approx = rand_nystrom_approx(op, SketchConfig(s=20, seed=2))
    err = np.linalg.norm(np.diag(lam) - approx_dense(approx), 2)
    assert err <= 10.0 * lam[20]


def test_factor_shapes_and_orthonormality():
    rng = np.random.default_rng(4)
    op = gram_operator(rng.standard_normal((30, 12)))
    approx = rand_nystrom_approx(op, SketchConfig(s=7, seed=5))
    assert approx.u.shape == (12, 7)
    assert approx.eigs.shape == (7,)
    npt.assert_allclose(approx.u.T @ approx.u, np.eye(7), atol=1e-10)
    assert (np.diff(approx.eigs) <= 1e-12).all()
    assert (approx.eigs >= 0).all()


def test_never_overestimates_matched_eigenvalues():
    rng = np.random.default_rng(6)
    for trial in range(5):
        a = rng.standard_normal((25, 15))
        op = gram_operator(a)
        h = dense_from_operator(op)
        lam = np.linalg.eigvalsh(h)[::-1]
        approx = rand_nystrom_approx(op, SketchConfig(s=9, seed=trial))
        scale = 1e-8 * np.linalg.norm(h, 2)
        assert (approx.eigs <= lam[:9] + scale).all()


def test_approximation_is_loewner_below_operator():
    rng = np.random.default_rng(7)
    op, h = psd_operator_from_spectrum(np.linspace(3.0, 0.01, 18), seed=8)
    approx = rand_nystrom_approx(op, SketchConfig(s=6, seed=9))
    gap = h - approx_dense(approx)
    norm_h = np.linalg.norm(h, 2)
    for _ in range(20):
        v = rng.standard_normal(18)
        assert v @ (gap @ v) >= -1e-8 * norm_h * (v @ v)


def test_deterministic_given_seed():
    rng = np.random.default_rng(10)
    op = gram_operator(rng.standard_normal((20, 10)))
    a1 = rand_nystrom_approx(op, SketchConfig(s=5, seed=11))
    a2 = rand_nystrom_approx(op, SketchConfig(s=5, seed=11))
    npt.assert_array_equal(a1.u, a2.u)
    npt.assert_array_equal(a1.eigs, a2.eigs)
    a3 = rand_nystrom_approx(op, SketchConfig(s=5, seed=12))
    assert np.abs(a1.u - a3.u).max() > 0


def test_matvec_count_equals_sketch_size():
    op, counter = counting_matvec(diag_operator(np.linspace(1.0, 0.1, 16)))
    rand_nystrom_approx(op, SketchConfig(s=6, seed=0))
    assert counter["n"] == 6


def test_sketch_size_validation():
    with pytest.raises(ValidationError):
        SketchConfig(s=0)
    with pytest.raises(ValidationError):
        rand_nystrom_approx(diag_operator(np.ones(4)), SketchConfig(s=5))


def test_factorization_error_reports_sketch_size():
    # an indefinite input breaks the PSD contract; the error must be structured
    op = SymmetricPsdOperator(6, lambda v: -v)
    with pytest.raises(SketchFactorizationError) as e:
        rand_nystrom_approx(op, SketchConfig(s=3, seed=0))
    assert e.value.sketch_size == 3


def test_adaptive_terminates_when_spectrum_is_flat_enough():
    eigvals = np.concatenate([np.linspace(4.0, 1.0, 10), np.zeros(30)])
    op, _ = psd_operator_from_spectrum(eigvals, seed=13)
    cfg = AdaptiveConfig(initial_rank=16, max_rank=40, rho=1.0, tol=1.5, seed=14)
    approx = adaptive_nystrom_approx(op, cfg)
    assert approx.rank == 16
    assert not approx.rank_capped
    assert (approx.eigs[-1] + cfg.rho) / cfg.rho <= cfg.tol


def test_adaptive_flags_rank_budget_exhaustion():
    # identity spectrum never meets tol < 2: grow 4 -> 8 -> 16 -> 20 and flag
    op, counter = counting_matvec(diag_operator(np.ones(20)))
    cfg = AdaptiveConfig(initial_rank=4, max_rank=20, rho=1.0, tol=1.5, seed=15)
    approx = adaptive_nystrom_approx(op, cfg)
    assert approx.rank_capped
    assert approx.rank == 20
    assert counter["n"] == 20


def test_adaptive_reuses_every_matvec():
    lam = 0.7 ** np.arange(64)
    op, counter = counting_matvec(diag_operator(lam))
    cfg = AdaptiveConfig(initial_rank=4, max_rank=64, rho=1e-3, tol=5.0, seed=16)
    approx = adaptive_nystrom_approx(op, cfg)
    assert counter["n"] == approx.rank
    assert not approx.rank_capped
    assert (approx.eigs[-1] + cfg.rho) / cfg.rho <= cfg.tol


def test_adaptive_factors_stay_consistent_after_reorthonormalization():
    # drift in the reused products would break domination and the Loewner order
    lam = 0.5 ** np.arange(40)
    op, h = psd_operator_from_spectrum(lam, seed=17)
    cfg = AdaptiveConfig(initial_rank=5, max_rank=40, rho=1e-4, tol=2.0, seed=18)
    approx = adaptive_nystrom_approx(op, cfg)
    npt.assert_allclose(approx.u.T @ approx.u, np.eye(approx.rank), atol=1e-9)
    norm_h = np.linalg.norm(h, 2)
    lam_true = np.linalg.eigvalsh(h)[::-1]
    assert (approx.eigs <= lam_true[: approx.rank] + 1e-8 * norm_h).all()
    gap = h - approx_dense(approx)
    rng = np.random.default_rng(0)
    for _ in range(20):
        v = rng.standard_normal(40)
        assert v @ (gap @ v) >= -1e-8 * norm_h * (v @ v)
    assert np.linalg.norm(gap, 2) <= 1e-3 * norm_h


def test_adaptive_deterministic_given_seed():
    op = diag_operator(np.linspace(2.0, 0.0, 24))
    cfg = AdaptiveConfig(initial_rank=3, max_rank=24, rho=0.1, tol=3.0, seed=19)
    a1 = adaptive_nystrom_approx(op, cfg)
    a2 = adaptive_nystrom_approx(op, cfg)
    npt.assert_array_equal(a1.u, a2.u)
    npt.assert_array_equal(a1.eigs, a2.eigs)


def test_adaptive_config_validation():
    with pytest.raises(ValidationError):
        AdaptiveConfig(initial_rank=0, max_rank=4, rho=1.0, tol=2.0)
    with pytest.raises(ValidationError):
        AdaptiveConfig(initial_rank=8, max_rank=4, rho=1.0, tol=2.0)
    with pytest.raises(ValidationError):
        AdaptiveConfig(initial_rank=2, max_rank=4, rho=0.0, tol=2.0)
    with pytest.raises(ValidationError):
        AdaptiveConfig(initial_rank=2, max_rank=4, rho=1.0, tol=1.0)
    with pytest.raises(ValidationError):
        adaptive_nystrom_approx(
            diag_operator(np.ones(4)),
            AdaptiveConfig(initial_rank=2, max_rank=8, rho=1.0, tol=2.0),
        )


def test_effective_dimension_matches_dense_trace():
    rng = np.random.default_rng(20)
    a = rng.standard_normal((30, 30))
    h = a @ a.T
    lam = np.linalg.eigvalsh(h)
    for rho in (0.1, 1.0, 10.0):
        npt.assert_allclose(
            effective_dimension(lam, rho),
            effective_dimension_dense(h, rho),
            rtol=1e-10,
        )


def test_effective_dimension_decreases_with_rho():
    rng = np.random.default_rng(21)
    for _ in range(10):
        lam = rng.uniform(0.0, 5.0, 12)
        rhos = np.sort(rng.uniform(0.01, 10.0, 4))
        vals = [effective_dimension(lam, r) for r in rhos]
        assert all(x >= y - 1e-12 for x, y in zip(vals, vals[1:]))


def test_effective_dimension_validation():
    with pytest.raises(ValidationError):
        effective_dimension([1.0, -0.5], 1.0)
    with pytest.raises(ValidationError):
        effective_dimension([1.0], 0.0)


def test_theoretical_sketch_size_frozen_values():
    assert theoretical_sketch_size(0.0, 0.1) == 325
    assert theoretical_sketch_size(10.0, 0.01) == 941


def test_theoretical_sketch_size_validation():
    with pytest.raises(ValidationError):
        theoretical_sketch_size(-1.0, 0.1)
    with pytest.raises(ValidationError):
        theoretical_sketch_size(1.0, 0.0)
    with pytest.raises(ValidationError):
        theoretical_sketch_size(1.0, 1.0)
