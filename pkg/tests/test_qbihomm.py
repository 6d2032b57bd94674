import numpy as np
import pytest
import scipy.sparse as sp

from reusemor.core.errors import ConfigError, DimensionMismatch, ReductionFailed, SingularShiftError
from reusemor.models.common import PrecondKind, PrecondMode
from reusemor.models.mor import QbConfig
from reusemor.models.solver import GmresConfig
from reusemor.models.systems import QbSystem
from reusemor.mor.generators import generate_qb_toy
from reusemor.mor.qbihomm import kron_compress_quadratic, qbihomm_reduce


def _unit(n, k):
    e = np.zeros((n, 1))
    e[k, 0] = 1.0
    return e


def _hand_system(K_scale=-1.0, n=3):
    I = sp.identity(n, format="csr")
    return QbSystem(D=I, K=K_scale * I, N=sp.csr_matrix((n, n)), H=sp.csr_matrix((n, n * n)), F=_unit(n, 0), C=_unit(n, 1))


def test_compression_matches_dense_kron(rng):
    n, r = 6, 3
    H = sp.random(n, n * n, density=0.2, random_state=3, data_rvs=rng.standard_normal)
    U = np.linalg.qr(rng.standard_normal((n, r)))[0]
    expected = U.T @ H.toarray() @ np.kron(U, U)
    np.testing.assert_allclose(kron_compress_quadratic(H, U), expected, atol=1e-12)
    assert not np.any(kron_compress_quadratic(sp.csr_matrix((n, n * n)), U))
    with pytest.raises(DimensionMismatch):
        kron_compress_quadratic(sp.csr_matrix((n, n)), U)


def test_hand_case_basis():
    red, report = qbihomm_reduce(_hand_system(), QbConfig(sigmas=(1.0,), p_moments=1, q_moments=1))
    assert red.r == 2
    np.testing.assert_allclose(red.U @ red.U.T, np.diag([1.0, 1.0, 0.0]), atol=1e-12)
    assert report.meta["candidate_columns"] == 5
    rows = {r.side: r for r in report.rows}
    assert rows["V"].solves == 3 and rows["W"].solves == 2
    assert rows["V"].shift == 1.0 and rows["W"].shift == 2.0


def test_basis_contains_all_moments():
    n = 14
    sys = generate_qb_toy(n, seed=2)
    cfg = QbConfig(sigmas=(0.5, 1.0), p_moments=1, q_moments=1, gmres=GmresConfig(rel_tol=1e-12))
    red, _ = qbihomm_reduce(sys, cfg)
    D, K = sys.D.toarray(), sys.K.toarray()
    moments = []
    for s in cfg.sigmas:
        A = s * D - K
        x = np.linalg.solve(A, sys.f_vector())
        for _ in range(3):
            moments.append(x / np.linalg.norm(x))
            x = np.linalg.solve(A, D @ x)
        At = (2.0 * s * D - K).T
        y = np.linalg.solve(At, sys.c_vector())
        for _ in range(2):
            moments.append(y / np.linalg.norm(y))
            y = np.linalg.solve(At, D.T @ y)
    for v in moments:
        assert np.linalg.norm(v - red.U @ (red.U.T @ v)) < 1e-8
    assert red.r <= 10
    np.testing.assert_allclose(red.U.T @ red.U, np.eye(red.r), atol=1e-10)


def test_reduced_matrices():
    sys = generate_qb_toy(10, seed=5)
    red, _ = qbihomm_reduce(sys, QbConfig(sigmas=(1.0, 2.0), gmres=GmresConfig(rel_tol=1e-10)))
    U = red.U
    np.testing.assert_allclose(red.K, U.T @ sys.K.toarray() @ U, atol=1e-12)
    np.testing.assert_allclose(red.H, U.T @ sys.H.toarray() @ np.kron(U, U), atol=1e-12)
    np.testing.assert_allclose(red.C, U.T @ sys.C.toarray(), atol=1e-12)


def test_build_counts_follow_mode():
    sys = generate_qb_toy(20, seed=1)
    sigmas = (0.5, 1.0, 1.5)
    _, reused = qbihomm_reduce(sys, QbConfig(sigmas=sigmas, reuse=True))
    _, fresh = qbihomm_reduce(sys, QbConfig(sigmas=sigmas, reuse=False))
    for side in ("V", "W"):
        counts = reused.meta[f"build_counts_{side}"]
        assert counts[PrecondKind.FRESH.value] == 1
        assert counts[PrecondKind.HORIZONTAL.value] == 2
        assert fresh.build_counts(side)[PrecondKind.FRESH.value] == 3
    assert reused.precond_mode == PrecondMode.REUSE.value
    assert fresh.precond_mode == PrecondMode.FRESH.value
    assert len(reused.rows) == 6


def test_singular_shift():
    with pytest.raises(SingularShiftError) as info:
        qbihomm_reduce(_hand_system(K_scale=1.0), QbConfig(sigmas=(1.0,)), PrecondMode.NONE)
    assert info.value.shift == 1.0


def test_gmres_failure_is_a_reduction_failure():
    sys = generate_qb_toy(30)
    cfg = QbConfig(sigmas=(1.0,), gmres=GmresConfig(rel_tol=1e-14, max_iter=1))
    with pytest.raises(ReductionFailed) as info:
        qbihomm_reduce(sys, cfg, PrecondMode.NONE)
    assert info.value.coords == ("V", 1, 0)


@pytest.mark.parametrize("kwargs", [dict(sigmas=()), dict(sigmas=(0.0,)), dict(sigmas=(1.0, 1.0)), dict(p_moments=-1)])
def test_config_validation(kwargs):
    with pytest.raises(ConfigError):
        QbConfig(**kwargs)
