"""
Implicit Kronecker-sum operators acting on vec(X), X of shape n x r.

    L = -(S kron I_n) - (I_r kron K) - sum_j (B_j^T kron N_j)

applied through (B^T kron A) vec(X) = vec(A X B), so the n*r x n*r matrix is
never formed. vec is column-major (Fortran order).
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator

from reusemor.core.errors import DimensionMismatch, KroneckerAssemblyTooLarge
from reusemor.linalg.sparse import as_csr, identity


class KroneckerOperator(LinearOperator):
    """
    spectrum: r x r real matrix S (a 1-D array is read as diag(S)); in BIRKA
              this is the real block-diagonal form of the reduced eigenvalues.
    base:     sparse n x n matrix (K, or K^T for the W side).
    couplers: (B_j, N_j) pairs, B_j dense r x r, N_j sparse n x n.
    """

    def __init__(
        self,
        spectrum,
        base: sp.spmatrix,
        couplers: Sequence[tuple[np.ndarray, sp.spmatrix]] = (),
    ):
        S = np.asarray(spectrum, dtype=np.float64)
        if S.ndim == 1:
            S = np.diag(S)
        if S.ndim != 2 or S.shape[0] != S.shape[1]:
            raise DimensionMismatch(f"spectrum must be r x r, got {S.shape}")
        self.spectrum = S
        self.base = as_csr(base)
        n = self.base.shape[0]
        if self.base.shape != (n, n):
            raise DimensionMismatch(f"base must be square, got {self.base.shape}")
        r = S.shape[0]
        pairs = []
        for B, N in couplers:
            B = np.asarray(B, dtype=np.float64)
            N = as_csr(N)
            if B.shape != (r, r) or N.shape != (n, n):
                raise DimensionMismatch(f"coupler shapes {B.shape}, {N.shape} do not conform to r={r}, n={n}")
            pairs.append((B, N))
        self.couplers = tuple(pairs)
        self.n = n
        self.r = r
        super().__init__(dtype=np.float64, shape=(n * r, n * r))

    @property
    def dim(self) -> int:
        return self.n * self.r

    def _matvec(self, v):
        return kron_matvec(self, np.asarray(v).ravel())

    def _rmatvec(self, v):
        X = np.asarray(v, dtype=np.float64).reshape((self.n, self.r), order="F")
        Y = -(X @ self.spectrum) - self.base.T @ X
        for B, N in self.couplers:
            Y -= N.T @ X @ B.T
        return Y.ravel(order="F")

    def assemble(self, nnz_cap: int | None = None) -> sp.csr_matrix:
        """Explicit sparse matrix with the same action (small instances only)."""
        estimate = self.r * self.base.nnz + int(np.count_nonzero(self.spectrum)) * self.n
        estimate += sum(int(np.count_nonzero(B)) * N.nnz for B, N in self.couplers)
        if nnz_cap is not None and estimate > nnz_cap:
            raise KroneckerAssemblyTooLarge(
                f"explicit Kronecker matrix would hold ~{estimate} nonzeros (cap {nnz_cap}); "
                "run with --precond none, lower r, or raise REUSEMOR_KRON_NNZ_CAP"
            )
        In = identity(self.n)
        Ir = sp.identity(self.r, dtype=np.float64, format="csr")
        L = -sp.kron(sp.csr_matrix(self.spectrum), In) - sp.kron(Ir, self.base)
        for B, N in self.couplers:
            L = L - sp.kron(sp.csr_matrix(B.T), N)
        return as_csr(L)


def kron_matvec(op: KroneckerOperator, v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] != op.dim:
        raise DimensionMismatch(f"kron_matvec: expected length {op.dim}, got shape {v.shape}")
    X = v.reshape((op.n, op.r), order="F")
    # (S kron I) vec X = vec(X S^T)
    Y = -(X @ op.spectrum.T) - op.base @ X
    for B, N in op.couplers:
        Y -= N @ X @ B
    return np.asarray(Y).ravel(order="F")
