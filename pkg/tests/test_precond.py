import numpy as np
import numpy.testing as npt
import pytest

from nysadmm.errors import DimensionMismatchError, ValidationError
from nysadmm.linops import SymmetricPsdOperator
from nysadmm.nystrom import (
    NystromApproximation,
    SketchConfig,
    effective_dimension,
    rand_nystrom_approx,
    theoretical_sketch_size,
)
from nysadmm.precond import build_preconditioner, empirical_condition_number

from oracles import (
    precond_inverse_dense,
    preconditioned_condition_number,
)


def spectrum_operator(eigvals, seed):
    rng = np.random.default_rng(seed)
    d = len(eigvals)
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    h = (q * np.asarray(eigvals)) @ q.T
    h = 0.5 * (h + h.T)
    return SymmetricPsdOperator(d, lambda v: h @ v), h


def random_preconditioner(d, s, rho, seed):
    op, h = spectrum_operator(np.linspace(2.0, 0.01, d), seed)
    approx = rand_nystrom_approx(op, SketchConfig(s=s, seed=seed + 1))
    return build_preconditioner(approx, rho), approx, h


def test_zero_eigs_gives_identity_inverse():
    rng = np.random.default_rng(0)
    u, _ = np.linalg.qr(rng.standard_normal((12, 4)))
    p = build_preconditioner(
        NystromApproximation(u=u, eigs=np.zeros(4), shift=0.0), rho=0.7
    )
    for _ in range(10):
        v = rng.standard_normal(12)
        npt.assert_allclose(p.apply_inverse(v), v, rtol=0, atol=1e-12)
    assert empirical_condition_number(p) == 1.0


def test_exact_approximation_gives_unit_condition_number():
    lam = np.sort(np.random.default_rng(1).uniform(0.1, 3.0, 10))[::-1]
    p = build_preconditioner(
        NystromApproximation(u=np.eye(10), eigs=lam, shift=0.0), rho=0.5
    )
    h = np.diag(lam)
    # P^{-1}(H + rho I) collapses to (lam_s + rho) I
    for j in range(10):
        e = np.zeros(10)
        e[j] = 1.0
        got = p.apply_inverse(h @ e + 0.5 * e)
        npt.assert_allclose(got, (lam[-1] + 0.5) * e, rtol=1e-12, atol=1e-14)
    kappa = preconditioned_condition_number(h, np.eye(10), lam, 0.5)
    npt.assert_allclose(kappa, 1.0, rtol=1e-10)


def test_apply_then_inverse_roundtrips():
    rng = np.random.default_rng(2)
    p, _, _ = random_preconditioner(d=25, s=8, rho=0.3, seed=3)
    for _ in range(20):
        v = rng.standard_normal(25)
        npt.assert_allclose(p.apply(p.apply_inverse(v)), v, rtol=1e-10)
        npt.assert_allclose(p.apply_inverse(p.apply(v)), v, rtol=1e-10)


def test_inverse_fixes_orthogonal_complement():
    rng = np.random.default_rng(4)
    p, _, _ = random_preconditioner(d=20, s=6, rho=1.0, seed=5)
    v = rng.standard_normal(20)
    v -= p.u @ (p.u.T @ v)
    npt.assert_allclose(p.apply_inverse(v), v, rtol=1e-10)


def test_inverse_scales_eigvectors():
    p, _, _ = random_preconditioner(d=18, s=5, rho=0.25, seed=6)
    for j in range(5):
        v = p.u[:, j]
        expect = ((p.lam_s + p.rho) / (p.eigs[j] + p.rho)) * v
        npt.assert_allclose(p.apply_inverse(v), expect, rtol=1e-11)


def test_inverse_matches_dense_oracle():
    rng = np.random.default_rng(7)
    p, approx, _ = random_preconditioner(d=22, s=7, rho=0.9, seed=8)
    dense = precond_inverse_dense(approx.u, approx.eigs, 0.9)
    for _ in range(10):
        v = rng.standard_normal(22)
        npt.assert_allclose(p.apply_inverse(v), dense @ v, rtol=1e-12, atol=1e-12)


def test_inverse_is_linear():
    rng = np.random.default_rng(9)
    p, _, _ = random_preconditioner(d=15, s=4, rho=0.6, seed=10)
    for _ in range(10):
        a, b = rng.standard_normal(2)
        u = rng.standard_normal(15)
        v = rng.standard_normal(15)
        lhs = p.apply_inverse(a * u + b * v)
        rhs = a * p.apply_inverse(u) + b * p.apply_inverse(v)
        npt.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


def test_empirical_condition_number_values():
    rng = np.random.default_rng(11)
    u, _ = np.linalg.qr(rng.standard_normal((6, 2)))
    p1 = build_preconditioner(NystromApproximation(u, np.zeros(2), 0.0), rho=1.0)
    assert empirical_condition_number(p1) == 1.0
    p2 = build_preconditioner(NystromApproximation(u, np.array([2.0, 1.0]), 0.0), rho=1.0)
    assert empirical_condition_number(p2) == 2.0


def test_empirical_condition_number_under_theoretical_sizing():
    # spectrum decays fast enough that the sized sketch is far past the tail
    d = 800
    lam = 0.75 ** np.arange(1, d + 1)
    op = SymmetricPsdOperator(d, lambda v, lam=lam: lam * v)
    rho, eps = 0.1, 42.0
    deff = effective_dimension(lam, eps * rho / 6.0)
    s = min(theoretical_sketch_size(deff, 0.1), d)
    assert s < d  # sizing must be non-vacuous here
    approx = rand_nystrom_approx(op, SketchConfig(s=s, seed=12))
    p = build_preconditioner(approx, rho)
    assert empirical_condition_number(p) <= 1.0 + eps / 42.0


def test_condition_number_bound_with_sized_sketch():
    # dense-oracle condition number of the preconditioned system stays <= 8
    hits = 0
    for trial in range(10):
        d = 80
        lam = 0.9 ** np.arange(d)
        op, h = spectrum_operator(lam, seed=100 + trial)
        rho = 1e-2
        s = min(theoretical_sketch_size(effective_dimension(lam, rho), 0.1), d)
        approx = rand_nystrom_approx(op, SketchConfig(s=s, seed=200 + trial))
        kappa = preconditioned_condition_number(h, approx.u, approx.eigs, rho)
        if kappa <= 8.0:
            hits += 1
    assert hits >= 9


def test_deterministic_condition_number_bound_never_fails():
    # the (lam_s + rho + ||E||) / rho bound is deterministic
    rng = np.random.default_rng(13)
    for trial in range(10):
        d = 60
        lam = np.sort(rng.uniform(0.0, 3.0, d))[::-1]
        op, h = spectrum_operator(lam, seed=300 + trial)
        rho = 10.0 ** rng.uniform(-3, 0)
        approx = rand_nystrom_approx(op, SketchConfig(s=12, seed=400 + trial))
        kappa = preconditioned_condition_number(h, approx.u, approx.eigs, rho)
        err = np.linalg.norm(h - (approx.u * approx.eigs) @ approx.u.T, 2)
        bound = (approx.eigs[-1] + rho + err) / rho
        assert kappa <= bound + 1e-8
    assert trial == 9


def test_preconditioner_owns_copies():
    rng = np.random.default_rng(14)
    u, _ = np.linalg.qr(rng.standard_normal((8, 3)))
    eigs = np.array([3.0, 2.0, 1.0])
    approx = NystromApproximation(u=u, eigs=eigs, shift=0.0)
    p = build_preconditioner(approx, rho=1.0)
    v = rng.standard_normal(8)
    before = p.apply_inverse(v).copy()
    u[:] = 0.0
    eigs[:] = 0.0
    npt.assert_array_equal(p.apply_inverse(v), before)


def test_build_validation():
    rng = np.random.default_rng(15)
    u, _ = np.linalg.qr(rng.standard_normal((8, 3)))
    good = NystromApproximation(u=u, eigs=np.array([3.0, 2.0, 1.0]), shift=0.0)
    with pytest.raises(ValidationError):
        build_preconditioner(good, rho=0.0)
    with pytest.raises(ValidationError):
        build_preconditioner(
            NystromApproximation(u=np.empty((8, 0)), eigs=np.empty(0), shift=0.0), 1.0
        )
    with pytest.raises(ValidationError):
        build_preconditioner(
            NystromApproximation(u=u, eigs=np.array([3.0, -1.0, 1.0]), shift=0.0), 1.0
        )
    with pytest.raises(ValidationError):
        build_preconditioner(
            NystromApproximation(u=u, eigs=np.array([1.0, 2.0, 3.0]), shift=0.0), 1.0
        )
    p = build_preconditioner(good, rho=1.0)
    with pytest.raises(DimensionMismatchError):
        p.apply_inverse(np.ones(5))
