import numpy as np
import pytest
import scipy.sparse as sp

from reusemor.core.errors import DimensionMismatch, KroneckerAssemblyTooLarge
from reusemor.linalg.kron import KroneckerOperator, kron_matvec
from reusemor.mor.birka import birka_assemble_explicit
from tests.conftest import random_sparse


def dense_operator(S, K, couplers):
    n, r = K.shape[0], S.shape[0]
    L = -np.kron(S, np.eye(n)) - np.kron(np.eye(r), K.toarray())
    for B, N in couplers:
        L -= np.kron(B.T, N.toarray())
    return L


@pytest.mark.parametrize("n,r,m", [(1, 1, 0), (3, 2, 1), (4, 3, 2), (6, 4, 2)])
def test_kron_matvec_and_assembly_match_dense_oracle(rng, n, r, m):
    S = rng.standard_normal((r, r))
    K = random_sparse(rng, n, 0.5, shift=1.0)
    couplers = [(rng.standard_normal((r, r)), random_sparse(rng, n, 0.5)) for _ in range(m)]
    op = KroneckerOperator(S, K, couplers)
    L = dense_operator(S, K, couplers)
    v = rng.standard_normal(n * r)
    np.testing.assert_allclose(kron_matvec(op, v), L @ v, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(op.rmatvec(v), L.T @ v, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(birka_assemble_explicit(op).toarray(), L, rtol=1e-12, atol=1e-12)


def test_r1_collapses_to_sparse_sum():
    K = sp.csr_matrix(np.array([[2.0, 1.0], [0.0, 3.0]]))
    N = sp.csr_matrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
    op = KroneckerOperator([-0.5], K, [(np.array([[0.25]]), N)])
    expected = 0.5 * np.eye(2) - K.toarray() - 0.25 * N.toarray()
    np.testing.assert_allclose(op.assemble().toarray(), expected)


def test_no_couplers_gives_block_diagonal():
    K = sp.csr_matrix(np.diag([1.0, 2.0, 3.0]))
    op = KroneckerOperator(np.array([-1.0, -2.0]), K)
    L = op.assemble().toarray()
    np.testing.assert_allclose(L[:3, :3], np.eye(3) - K.toarray())
    np.testing.assert_allclose(L[3:, 3:], 2 * np.eye(3) - K.toarray())
    assert np.all(L[:3, 3:] == 0) and np.all(L[3:, :3] == 0)


def test_assembly_cap():
    op = KroneckerOperator(np.ones((3, 3)), sp.identity(50, format="csr"))
    with pytest.raises(KroneckerAssemblyTooLarge, match="--precond none"):
        op.assemble(nnz_cap=100)


def test_shape_checks(rng):
    with pytest.raises(DimensionMismatch):
        KroneckerOperator(np.ones((2, 3)), sp.identity(3))
    with pytest.raises(DimensionMismatch):
        KroneckerOperator(np.eye(2), sp.identity(3), [(np.eye(3), sp.identity(3))])
    op = KroneckerOperator(np.eye(2), sp.identity(3))
    with pytest.raises(DimensionMismatch):
        kron_matvec(op, np.ones(5))
