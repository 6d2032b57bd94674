"""Orthonormal bases and (Petrov-)Galerkin projections of sparse operators."""

from __future__ import annotations

import logging

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from reusemor.core.errors import DimensionMismatch, ProjectionError


logger = logging.getLogger(__name__)


def orthonormalize(
    block: np.ndarray,
    basis: np.ndarray | None = None,
    *,
    rank_tol: float = 1e-10,
    max_new: int | None = None,
) -> np.ndarray:
    """
    New orthonormal columns spanning `block` modulo span(basis).

    Modified Gram-Schmidt with one reorthogonalisation pass. A column whose
    remainder is at most rank_tol times the leading singular value of the
    block is dropped. Returns an n x k array, k possibly 0.
    """
    X = np.array(block, dtype=np.float64, copy=True)
    if X.ndim == 1:
        X = X[:, None]
    n = X.shape[0]
    if basis is not None and basis.size and basis.shape[0] != n:
        raise DimensionMismatch(f"block has {n} rows, basis has {basis.shape[0]}")
    if X.shape[1] == 0:
        return np.zeros((n, 0))
    lead = float(np.linalg.norm(X, 2))
    if lead == 0.0:
        return np.zeros((n, 0))
    drop = rank_tol * lead

    prior = [] if basis is None or basis.size == 0 else [basis[:, i] for i in range(basis.shape[1])]
    out: list[np.ndarray] = []
    for k in range(X.shape[1]):
        if max_new is not None and len(out) >= max_new:
            break
        w = X[:, k]
        for _ in range(2):
            for q in prior:
                w = w - (q @ w) * q
            for q in out:
                w = w - (q @ w) * q
        nrm = float(np.linalg.norm(w))
        if nrm <= drop:
            logger.debug(f"dropped dependent column {k} (remainder {nrm:.2e} vs {lead:.2e})")
            continue
        out.append(w / nrm)
    if not out:
        return np.zeros((n, 0))
    return np.column_stack(out)


def orth(X: np.ndarray, rank_tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of range(X) by rank-revealing QR."""
    X = np.asarray(X, dtype=np.float64)
    if X.shape[1] == 0:
        return np.zeros((X.shape[0], 0))
    Q, R, _ = sla.qr(X, mode="economic", pivoting=True)
    d = np.abs(np.diag(R))
    if d.size == 0 or d[0] == 0.0:
        return np.zeros((X.shape[0], 0))
    keep = int(np.sum(d > rank_tol * d[0]))
    return Q[:, :keep]


def project(A, V: np.ndarray, W: np.ndarray | None = None) -> np.ndarray:
    """W^T A V (W = V for a Galerkin projection) as a dense array."""
    W = V if W is None else W
    AV = A @ V
    if sp.issparse(AV):
        AV = AV.toarray()
    return np.asarray(W.T @ AV, dtype=np.float64)


def restrict(B, W: np.ndarray) -> np.ndarray:
    """W^T B for a sparse or dense input/output map B."""
    Bd = B.toarray() if sp.issparse(B) else np.asarray(B, dtype=np.float64)
    return W.T @ Bd


def oblique_inverse(W: np.ndarray, V: np.ndarray, *, cond_max: float = 1e12) -> np.ndarray:
    """(W^T V)^{-1}; ProjectionError when W^T V is numerically singular."""
    G = W.T @ V
    c = np.linalg.cond(G)
    if not np.isfinite(c) or c > cond_max:
        raise ProjectionError(f"W^T V is singular (condition number {c:.2e}); the projection is undefined")
    return np.linalg.inv(G)
