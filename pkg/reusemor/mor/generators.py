"""
Synthetic test models.

The disc-brake-like model mimics K = K_E + K_R + Omega^2 K_G with
proportional damping on a 2-D grid: heterogeneous coefficients and lumped
masses spread over several orders of magnitude make the shifted matrices
hard for unpreconditioned GMRES.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from reusemor.core.errors import ConfigError
from reusemor.linalg.sparse import as_csr
from reusemor.models.systems import BilinearSystem, QbSystem, SecondOrderSystem


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DiscBrakeParts:
    M: sp.csr_matrix
    K_E: sp.csr_matrix
    K_R: sp.csr_matrix
    K_G: sp.csr_matrix


def _grid_edges(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Right and down neighbours of n nodes laid out row-major on a near-square grid."""
    nx = int(math.ceil(math.sqrt(n)))
    k = np.arange(n)
    right = k[(k % nx != nx - 1) & (k + 1 < n)]
    down = k[k + nx < n]
    src = np.concatenate([right, down])
    dst = np.concatenate([right + 1, down + nx])
    return src, dst


def disc_brake_parts(n: int, seed: int = 0) -> DiscBrakeParts:
    if n < 4:
        raise ConfigError(f"disc-brake-like model needs n >= 4, got {n}")
    rng = np.random.default_rng(seed)
    src, dst = _grid_edges(n)
    coef = 10.0 ** rng.uniform(0.0, 3.0, size=src.size)

    # weighted graph Laplacian plus a small grounding term
    rows = np.concatenate([src, dst, src, dst])
    cols = np.concatenate([dst, src, src, dst])
    vals = np.concatenate([-coef, -coef, coef, coef])
    L = sp.coo_matrix((vals, (rows, cols)), shape=(n, n))
    K_E = as_csr(L + 1e-2 * float(coef.mean()) * sp.identity(n))

    skew = 0.05 * coef * rng.uniform(-1.0, 1.0, size=src.size)
    K_R = as_csr(sp.coo_matrix((np.concatenate([skew, -skew]), (np.concatenate([src, dst]), np.concatenate([dst, src]))), shape=(n, n)))

    masses = 10.0 ** rng.uniform(-4.0, 0.0, size=n)
    M = as_csr(sp.diags(masses))
    K_G = as_csr(sp.diags(0.1 * masses))
    return DiscBrakeParts(M=M, K_E=K_E, K_R=K_R, K_G=K_G)


def generate_disc_brake_like(
    n: int,
    omega: float = 2.0 * math.pi,
    alpha: float = 5e-2,
    beta: float = 5e-6,
    seed: int = 0,
) -> SecondOrderSystem:
    """M x'' + D x' + K x = e_1 u, y = e_1^T x with D = alpha M + beta K."""
    parts = disc_brake_parts(n, seed)
    K = as_csr(parts.K_E + parts.K_R + (omega * omega) * parts.K_G)
    D = as_csr(alpha * parts.M + beta * K)
    D.eliminate_zeros()
    e1 = sp.csr_matrix(([1.0], ([0], [0])), shape=(n, 1))
    logger.info(f"generated disc-brake-like model n={n} nnz(K)={K.nnz} omega={omega:g} alpha={alpha:g} beta={beta:g}")
    return SecondOrderSystem(M=parts.M, D=D, K=K, F=e1, C=e1.copy(), alpha=alpha, beta=beta)


def _laplacian_1d(n: int) -> sp.csr_matrix:
    return as_csr(sp.diags([-np.ones(n - 1), 2.0 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1]))


def generate_bilinear_toy(n: int, m: int = 1, q: int = 1, *, coupling: float = 0.1, seed: int = 0) -> BilinearSystem:
    """
    Stable bilinear model: K = -(n+1)^2/10 (L + I) from the 1-D Laplacian,
    couplings N_j with row-sum norm `coupling` times the lower bound (n+1)^2/10
    on |eig(K)|.
    """
    if n < 2:
        raise ConfigError(f"bilinear toy needs n >= 2, got {n}")
    rng = np.random.default_rng(seed)
    scale = (n + 1) ** 2 / 10.0
    K = as_csr(-scale * (_laplacian_1d(n) + sp.identity(n)))
    N = []
    for _ in range(m):
        R = sp.random(n, n, density=min(1.0, 3.0 / n), random_state=rng, data_rvs=rng.standard_normal)
        R = as_csr(R + sp.diags(rng.standard_normal(n)))
        norm = np.abs(R).sum(axis=1).max()
        N.append(as_csr(R * (coupling * scale / norm)))
    F = rng.standard_normal((n, m))
    F /= np.linalg.norm(F, axis=0, keepdims=True)
    C = rng.standard_normal((n, q))
    C /= np.linalg.norm(C, axis=0, keepdims=True)
    return BilinearSystem(K=K, N=tuple(N), F=F, C=C)


def generate_qb_toy(n: int, *, seed: int = 0, quad: float = 0.05) -> QbSystem:
    """D = I, K = -(L + I), weak random N, H coupling neighbouring states."""
    if n < 2:
        raise ConfigError(f"QB toy needs n >= 2, got {n}")
    rng = np.random.default_rng(seed)
    D = as_csr(sp.identity(n))
    K = as_csr(-(_laplacian_1d(n) + sp.identity(n)))
    N = as_csr(0.1 * sp.diags(rng.uniform(-1.0, 1.0, n)))
    a = np.arange(n)
    H = as_csr(sp.coo_matrix((quad * rng.uniform(-1.0, 1.0, n), (a, a * n + (a + 1) % n)), shape=(n, n * n)))
    F = sp.csr_matrix(([1.0], ([0], [0])), shape=(n, 1))
    C = sp.csr_matrix(np.full((n, 1), 1.0 / math.sqrt(n)))
    return QbSystem(D=D, K=K, N=N, H=H, F=F, C=C)
