import numpy as np
import pytest
import scipy.sparse as sp

from reusemor.core.errors import ConfigError, DimensionMismatch, SpaiError
from reusemor.linalg.sparse import frobenius_distance
from reusemor.linalg.spai import fit_columns, initial_patterns, spai_build, spai_column_solve
from reusemor.models.solver import SpaiConfig, SpaiPattern
from tests.conftest import full_patterns, random_nonsingular, random_sparse


def test_full_pattern_recovers_inverse(rng):
    for _ in range(20):
        n = int(rng.integers(2, 11))
        A = random_nonsingular(rng, n)
        res = fit_columns(sp.csr_matrix(A), SpaiConfig(), patterns=full_patterns(n))
        Ainv = np.linalg.inv(A)
        assert np.linalg.norm(res.p.toarray() - Ainv) <= 1e-10 * np.linalg.norm(Ainv)
        assert res.frobenius_residual <= 1e-10


@pytest.mark.parametrize("n", [6, 13, 20])
def test_column_is_least_squares_optimal(rng, n):
    A = random_sparse(rng, n, 0.3, shift=3.0)
    patterns = initial_patterns(A, SpaiConfig())
    res = fit_columns(A, SpaiConfig(max_pattern_sweeps=0), patterns=patterns)
    Ad = A.toarray()
    for j in range(n):
        J = patterns[j]
        e = np.zeros(n)
        e[j] = 1.0
        p_ls, *_ = np.linalg.lstsq(Ad[:, J], e, rcond=None)
        np.testing.assert_allclose(res.p.toarray()[J, j], p_ls, atol=1e-10)
        assert res.residuals[j] == pytest.approx(np.linalg.norm(e - Ad[:, J] @ p_ls), abs=1e-10)


def test_diagonal_pattern_of_diagonal_matrix():
    A = sp.diags([2.0, 4.0, 8.0]).tocsr()
    res = spai_build(A, SpaiConfig(pattern=SpaiPattern.DIAGONAL))
    np.testing.assert_allclose(res.p.toarray(), np.diag([0.5, 0.25, 0.125]))
    assert res.frobenius_residual == pytest.approx(0.0, abs=1e-14)


def test_patterns_contain_diagonal():
    A = sp.csr_matrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
    for cfg in (SpaiConfig(), SpaiConfig(pattern=SpaiPattern.POWER_OF_A, power=2)):
        for j, J in enumerate(initial_patterns(A, cfg)):
            assert j in J


def test_augmentation_reduces_residual(rng):
    n = 30
    A = sp.diags([-np.ones(n - 1), 4 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1]).tocsr()
    static = spai_build(A, SpaiConfig(pattern=SpaiPattern.DIAGONAL, max_pattern_sweeps=0))
    adaptive = spai_build(A, SpaiConfig(pattern=SpaiPattern.DIAGONAL, max_pattern_sweeps=3))
    assert adaptive.frobenius_residual < static.frobenius_residual
    assert adaptive.augmented_columns > 0
    assert adaptive.p.getnnz(axis=0).max() <= 4


def test_zero_column_falls_back_to_unit_diagonal():
    A = sp.csr_matrix(np.array([[2.0, 0.0, 1.0], [0.0, 0.0, 1.0], [1.0, 0.0, 3.0]]))
    res = spai_build(A)
    assert 1 in res.fallback_columns
    assert 0 not in res.fallback_columns
    assert res.p[1, 1] == 1.0


def test_threads_do_not_change_result(rng):
    A = random_sparse(rng, 40, 0.1, shift=5.0)
    a = spai_build(A, threads=1)
    b = spai_build(A, threads=4)
    assert abs(a.p - b.p).max() == 0.0


def test_single_column_solve(rng):
    A = random_nonsingular(rng, 5)
    col, residual = spai_column_solve(sp.csr_matrix(A), 2, range(5))
    np.testing.assert_allclose(col.toarray().ravel(), np.linalg.inv(A)[:, 2], atol=1e-12)
    assert residual < 1e-12


def test_single_column_solve_rank_deficient():
    A = sp.csr_matrix(np.array([[1.0, 1.0], [1.0, 1.0]]))
    with pytest.raises(SpaiError):
        spai_column_solve(A, 0, [0, 1])


def test_errors():
    with pytest.raises(DimensionMismatch):
        spai_build(sp.csr_matrix(np.ones((2, 3))))
    with pytest.raises(ConfigError):
        SpaiConfig(fill_tol=0.0)


def test_shifted_laplacian_spai_beats_jacobi():
    n = 20
    A = sp.diags([-np.ones(n - 1), 2.5 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1], format="csr")
    res = spai_build(A, SpaiConfig(pattern=SpaiPattern.PATTERN_OF_A))
    jacobi = sp.diags(1.0 / A.diagonal())
    I = sp.identity(n)
    assert frobenius_distance(I, A @ res.p) < frobenius_distance(I, A @ jacobi)
    assert res.frobenius_residual == pytest.approx(frobenius_distance(I, A @ res.p), rel=1e-10)
