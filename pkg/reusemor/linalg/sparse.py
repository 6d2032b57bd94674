"""
Sparse matrix helpers.

The carrier type is scipy's CSR matrix kept in canonical form (sorted column
indices, duplicates summed, 64-bit reals). Matrices are treated as immutable
once canonicalised.
"""

from __future__ import annotations

from collections.abc import Iterable

import numpy as np
import scipy.sparse as sp

from reusemor.core.errors import DimensionMismatch, SpaiError


SparseMatrix = sp.csr_matrix


def as_csr(A) -> sp.csr_matrix:
    """Canonical float64 CSR copy of a dense array or any scipy sparse matrix."""
    if sp.issparse(A):
        out = sp.csr_matrix(A, dtype=np.float64, copy=True)
    else:
        arr = np.asarray(A, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2:
            raise DimensionMismatch(f"expected a 2-D matrix, got ndim={arr.ndim}")
        out = sp.csr_matrix(arr)
    out.sum_duplicates()
    out.sort_indices()
    return out


def identity(n: int) -> sp.csr_matrix:
    return sp.identity(n, dtype=np.float64, format="csr")


def _check_vector(x, n: int, what: str) -> np.ndarray:
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] != n:
        raise DimensionMismatch(f"{what}: expected vector of length {n}, got shape {v.shape}")
    return v


def matvec(A: sp.spmatrix, x) -> np.ndarray:
    v = _check_vector(x, A.shape[1], "matvec")
    return np.asarray(A @ v, dtype=np.float64).ravel()


def matvec_transpose(A: sp.spmatrix, x) -> np.ndarray:
    v = _check_vector(x, A.shape[0], "matvec_transpose")
    return np.asarray(A.T @ v, dtype=np.float64).ravel()


def frobenius_norm(A) -> float:
    if sp.issparse(A):
        A = sp.csr_matrix(A)
        A.sum_duplicates()
        return float(np.linalg.norm(A.data))
    return float(np.linalg.norm(np.asarray(A, dtype=np.float64)))


def frobenius_distance(A: sp.spmatrix, B: sp.spmatrix) -> float:
    if A.shape != B.shape:
        raise DimensionMismatch(f"cannot compare {A.shape} with {B.shape}")
    return frobenius_norm(sp.csr_matrix(A) - sp.csr_matrix(B))


def identity_distance(A: sp.spmatrix) -> float:
    """||I - A||_f / ||I||_f, the "Standard" diagnostic for a system matrix."""
    n = A.shape[0]
    return frobenius_distance(identity(n), A) / np.sqrt(n)


def column_shadow(A: sp.spmatrix) -> sp.csc_matrix:
    """Column-compressed copy used by column-driven algorithms (SPAI)."""
    C = sp.csc_matrix(A, dtype=np.float64)
    C.sum_duplicates()
    C.sort_indices()
    return C


def extract_column_submatrix(
    A: sp.spmatrix,
    col_pattern: Iterable[int],
    *,
    columns: sp.csc_matrix | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Dense block A(rows, pattern) restricted to the rows touched by the pattern.

    Returns (block, rows) where rows is the sorted row index map.
    Pass `columns` (a column_shadow of A) to avoid re-converting A per call.
    """
    pattern = np.asarray(list(col_pattern), dtype=np.int64)
    if pattern.size == 0:
        raise SpaiError("empty column pattern")
    ncols = A.shape[1]
    if pattern.min() < 0 or pattern.max() >= ncols:
        raise DimensionMismatch(f"pattern indices must lie in [0, {ncols})")
    C = columns if columns is not None else column_shadow(A)
    starts = C.indptr[pattern]
    stops = C.indptr[pattern + 1]
    counts = stops - starts
    if counts.sum() == 0:
        return np.zeros((0, pattern.size)), np.zeros(0, dtype=np.int64)
    take = np.concatenate([np.arange(s, e) for s, e in zip(starts, stops)])
    row_idx = C.indices[take]
    col_pos = np.repeat(np.arange(pattern.size), counts)
    rows, local = np.unique(row_idx, return_inverse=True)
    block = np.zeros((rows.size, pattern.size))
    block[local, col_pos] = C.data[take]
    return block, rows


def dense(A) -> np.ndarray:
    if sp.issparse(A):
        return A.toarray()
    return np.asarray(A, dtype=np.float64)
