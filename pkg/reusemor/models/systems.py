from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from reusemor.core.errors import DimensionMismatch
from reusemor.linalg.sparse import as_csr, frobenius_norm


logger = logging.getLogger(__name__)


def _square(name: str, A: sp.csr_matrix, n: int) -> None:
    if A.shape != (n, n):
        raise DimensionMismatch(f"{name} must be {n}x{n}, got {A.shape}")


def _rows(name: str, A: sp.csr_matrix, n: int) -> None:
    if A.shape[0] != n:
        raise DimensionMismatch(f"{name} must have {n} rows, got {A.shape}")


@dataclass(frozen=True)
class SecondOrderSystem:
    """M x'' + D x' + K x = F u, y = C^T x."""

    M: sp.csr_matrix
    D: sp.csr_matrix
    K: sp.csr_matrix
    F: sp.csr_matrix
    C: sp.csr_matrix
    alpha: float | None = None
    beta: float | None = None

    def __post_init__(self) -> None:
        for name in ("M", "D", "K", "F", "C"):
            object.__setattr__(self, name, as_csr(getattr(self, name)))
        n = self.M.shape[0]
        for name in ("M", "D", "K"):
            _square(name, getattr(self, name), n)
        _rows("F", self.F, n)
        _rows("C", self.C, n)
        if self.alpha is not None and self.beta is not None:
            gap = self.damping_gap()
            if gap > 1e-12:
                logger.warning(f"D is not alpha*M + beta*K for alpha={self.alpha}, beta={self.beta} (relative gap {gap:.2e})")

    @property
    def n(self) -> int:
        return self.M.shape[0]

    @property
    def m(self) -> int:
        return self.F.shape[1]

    @property
    def q(self) -> int:
        return self.C.shape[1]

    def damping_gap(self) -> float:
        """||D - (alpha M + beta K)||_f / ||D||_f (absolute when D = 0)."""
        alpha = self.alpha or 0.0
        beta = self.beta or 0.0
        gap = frobenius_norm(self.D - (alpha * self.M + beta * self.K))
        scale = frobenius_norm(self.D)
        return gap / scale if scale > 0 else gap


@dataclass(frozen=True)
class BilinearSystem:
    """x' = K x + sum_j N_j x u_j + F u, y = C^T x."""

    K: sp.csr_matrix
    N: tuple[sp.csr_matrix, ...]
    F: sp.csr_matrix
    C: sp.csr_matrix

    def __post_init__(self) -> None:
        object.__setattr__(self, "K", as_csr(self.K))
        object.__setattr__(self, "N", tuple(as_csr(Nj) for Nj in self.N))
        object.__setattr__(self, "F", as_csr(self.F))
        object.__setattr__(self, "C", as_csr(self.C))
        n = self.K.shape[0]
        _square("K", self.K, n)
        if not self.N:
            raise DimensionMismatch("a bilinear system needs at least one N_j")
        for j, Nj in enumerate(self.N):
            _square(f"N[{j}]", Nj, n)
        _rows("F", self.F, n)
        _rows("C", self.C, n)
        if self.F.shape[1] != len(self.N):
            raise DimensionMismatch(f"F has {self.F.shape[1]} inputs but {len(self.N)} N_j were given")

    @property
    def n(self) -> int:
        return self.K.shape[0]

    @property
    def m(self) -> int:
        return self.F.shape[1]

    @property
    def q(self) -> int:
        return self.C.shape[1]


@dataclass(frozen=True)
class QbSystem:
    """D x' = K x + N x u + H (x kron x) + F u, y = C^T x (SISO)."""

    D: sp.csr_matrix
    K: sp.csr_matrix
    N: sp.csr_matrix
    H: sp.csr_matrix
    F: sp.csr_matrix
    C: sp.csr_matrix

    def __post_init__(self) -> None:
        for name in ("D", "K", "N", "H", "F", "C"):
            object.__setattr__(self, name, as_csr(getattr(self, name)))
        n = self.D.shape[0]
        for name in ("D", "K", "N"):
            _square(name, getattr(self, name), n)
        if self.H.shape != (n, n * n):
            raise DimensionMismatch(f"H must be {n}x{n * n}, got {self.H.shape}")
        if self.F.shape != (n, 1) or self.C.shape != (n, 1):
            raise DimensionMismatch("QB systems are SISO: F and C must be n x 1")

    @property
    def n(self) -> int:
        return self.D.shape[0]

    def f_vector(self) -> np.ndarray:
        return self.F.toarray().ravel()

    def c_vector(self) -> np.ndarray:
        return self.C.toarray().ravel()
