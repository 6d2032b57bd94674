import numpy as np
import pytest
import scipy.sparse as sp


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_nonsingular(rng, n, density=1.0):
    """Diagonally dominant random matrix (dense or sparse pattern)."""
    A = rng.standard_normal((n, n))
    if density < 1.0:
        A *= rng.random((n, n)) < density
    A += (np.abs(A).sum(axis=1).max() + 1.0) * np.eye(n)
    return A


def random_sparse(rng, n, density=0.3, shift=0.0):
    A = sp.random(n, n, density=density, random_state=rng, data_rvs=rng.standard_normal)
    return sp.csr_matrix(A + shift * sp.identity(n))


def full_patterns(n):
    return [np.arange(n, dtype=np.int64) for _ in range(n)]


def small_second_order(n, seed=0, alpha=0.1, beta=0.01):
    """Well-conditioned proportionally damped model, F = e_1, C = ones / sqrt(n)."""
    from reusemor.models.systems import SecondOrderSystem

    gen = np.random.default_rng(seed)
    M = sp.diags(gen.uniform(1.0, 2.0, n))
    L = sp.diags([-np.ones(n - 1), 2.0 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1])
    skew = sp.diags([0.3 * np.ones(n - 1), -0.3 * np.ones(n - 1)], [-1, 1])
    K = 10.0 * L + sp.identity(n) + skew
    D = alpha * M + beta * K
    F = np.zeros((n, 1))
    F[0, 0] = 1.0
    C = np.full((n, 1), 1.0 / np.sqrt(n))
    return SecondOrderSystem(M=M, D=D, K=K, F=F, C=C, alpha=alpha, beta=beta)
