"""
Sparse approximate inverse by Frobenius-norm minimisation.

min_P ||E - A P||_f splits into one small least squares problem per column
of P; E is the identity for a plain SPAI and an arbitrary matrix for update
factors (see linalg.chain).
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from reusemor.core.errors import DimensionMismatch, SpaiError
from reusemor.core.timing import stopwatch
from reusemor.linalg.sparse import as_csr, column_shadow, extract_column_submatrix
from reusemor.models.solver import SpaiConfig, SpaiPattern


logger = logging.getLogger(__name__)


@dataclass
class SpaiResult:
    p: sp.csr_matrix
    # 2-norm residual of every column problem
    residuals: np.ndarray
    fallback_columns: list[int] = field(default_factory=list)
    augmented_columns: int = 0
    build_seconds: float = 0.0

    @property
    def frobenius_residual(self) -> float:
        return float(np.sqrt(np.sum(self.residuals**2)))


@dataclass
class _ColumnFit:
    indices: np.ndarray
    values: np.ndarray
    residual: float
    fallback: bool = False
    augmented: int = 0


def initial_patterns(A: sp.spmatrix, cfg: SpaiConfig) -> list[np.ndarray]:
    """Per-column index sets of P; the diagonal is always included."""
    n = A.shape[1]
    if cfg.pattern is SpaiPattern.DIAGONAL:
        return [np.array([j], dtype=np.int64) for j in range(n)]
    S = as_csr(A)
    S.data = np.ones_like(S.data)
    if cfg.pattern is SpaiPattern.POWER_OF_A:
        base = S.copy()
        for _ in range(cfg.power - 1):
            S = S @ base
            S.data = np.ones_like(S.data)
    S = column_shadow(S)
    patterns = []
    for j in range(n):
        rows = S.indices[S.indptr[j] : S.indptr[j + 1]]
        patterns.append(np.union1d(rows, [j]).astype(np.int64))
    return patterns


def _local_solve(block: np.ndarray, rhs_local: np.ndarray, rank_tol: float) -> np.ndarray | None:
    """Least squares via dense QR; None when the block is rank deficient."""
    m, k = block.shape
    if m < k:
        return None
    Q, R = np.linalg.qr(block)
    d = np.abs(np.diag(R))
    if d.size == 0 or d.max() == 0.0 or d.min() <= rank_tol * d.max():
        return None
    return sla.solve_triangular(R, Q.T @ rhs_local, lower=False, check_finite=False)


def _fit_column(
    columns: sp.csc_matrix,
    rhs_rows: np.ndarray,
    rhs_vals: np.ndarray,
    pattern: np.ndarray,
    cfg: SpaiConfig,
) -> _ColumnFit | None:
    """
    Solves min ||rhs - A[:, J] p|| over pattern J, growing J by the row of the
    largest residual entry while the relative residual exceeds fill_tol.
    """
    rhs_norm = float(np.linalg.norm(rhs_vals))
    J = np.asarray(pattern, dtype=np.int64)
    best: _ColumnFit | None = None
    sweep = 0
    while True:
        block, rows = extract_column_submatrix(columns, J, columns=columns)
        support = np.union1d(rows, rhs_rows)
        rhs_full = np.zeros(support.size)
        rhs_full[np.searchsorted(support, rhs_rows)] = rhs_vals
        pos = np.searchsorted(support, rows)
        p = _local_solve(block, rhs_full[pos], cfg.rank_tol)
        if p is None:
            return best
        r_full = rhs_full.copy()
        r_full[pos] -= block @ p
        residual = float(np.linalg.norm(r_full))
        best = _ColumnFit(indices=J, values=p, residual=residual, augmented=sweep)

        if residual <= cfg.fill_tol * max(rhs_norm, np.finfo(float).tiny):
            return best
        if sweep >= cfg.max_pattern_sweeps or J.size >= cfg.max_fill_per_col:
            return best
        if J.size >= columns.shape[1]:
            return best
        # largest |r| first, lowest index on ties
        order = np.lexsort((support, -np.abs(r_full)))
        candidate = None
        for idx in order:
            if r_full[idx] == 0.0:
                break
            row = support[idx]
            if row < columns.shape[1] and not np.any(J == row):
                candidate = row
                break
        if candidate is None:
            return best
        J = np.union1d(J, [candidate]).astype(np.int64)
        sweep += 1


def spai_column_solve(
    A: sp.spmatrix,
    col: int,
    pattern,
    *,
    rhs=None,
    cfg: SpaiConfig | None = None,
) -> tuple[sp.csc_matrix, float]:
    """
    One column of min ||E - A P||_f over a fixed pattern (no augmentation).

    E defaults to the identity; pass `rhs` (an n-vector) for general right-hand sides.
    """
    cfg = cfg or SpaiConfig()
    columns = column_shadow(A)
    n = A.shape[0]
    if not 0 <= col < A.shape[1]:
        raise DimensionMismatch(f"column {col} out of range for {A.shape}")
    if rhs is None:
        rhs_rows, rhs_vals = np.array([col], dtype=np.int64), np.array([1.0])
    else:
        dense_rhs = np.asarray(rhs, dtype=np.float64).ravel()
        if dense_rhs.shape[0] != n:
            raise DimensionMismatch(f"rhs must have length {n}")
        rhs_rows = np.flatnonzero(dense_rhs)
        rhs_vals = dense_rhs[rhs_rows]
    J = np.unique(np.asarray(list(pattern), dtype=np.int64))
    fit = _fit_column(columns, rhs_rows, rhs_vals, J, replace(cfg, max_pattern_sweeps=0))
    if fit is None:
        raise SpaiError(f"rank-deficient local least squares for column {col} on pattern {J.tolist()}")
    out = sp.csc_matrix((fit.values, fit.indices, [0, fit.indices.size]), shape=(A.shape[1], 1))
    return out, fit.residual


def fit_columns(
    A: sp.spmatrix,
    cfg: SpaiConfig,
    *,
    rhs: sp.spmatrix | None = None,
    patterns: list[np.ndarray] | None = None,
    threads: int = 1,
) -> SpaiResult:
    """
    Column-wise minimiser of ||E - A X||_f, E = rhs or the identity.

    Rank-deficient columns fall back to a single diagonal entry: 1/a_jj for
    the identity (1 when a_jj = 0), and 1 for a general E, so that an update
    factor column never does worse than the identity column.
    """
    A = as_csr(A)
    n = A.shape[0]
    if A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"SPAI needs a square matrix, got {A.shape}")
    E = None
    if rhs is not None:
        E = column_shadow(rhs)
        if E.shape != A.shape:
            raise DimensionMismatch(f"right-hand side {E.shape} does not match {A.shape}")

    with stopwatch() as sw:
        columns = column_shadow(A)
        pats = patterns if patterns is not None else initial_patterns(A, cfg)
        diag_A = A.diagonal()

        def solve(j: int) -> _ColumnFit:
            if E is None:
                rhs_rows, rhs_vals = np.array([j], dtype=np.int64), np.array([1.0])
            else:
                rhs_rows = E.indices[E.indptr[j] : E.indptr[j + 1]].astype(np.int64)
                rhs_vals = E.data[E.indptr[j] : E.indptr[j + 1]]
            fit = _fit_column(columns, rhs_rows, rhs_vals, pats[j], cfg)
            if fit is not None:
                return fit
            value = 1.0 / diag_A[j] if E is None and diag_A[j] != 0.0 else 1.0
            fb = np.array([value])
            r = np.zeros(n)
            r[rhs_rows] = rhs_vals
            r -= columns[:, j].toarray().ravel() * value
            return _ColumnFit(np.array([j], dtype=np.int64), fb, float(np.linalg.norm(r)), fallback=True)

        if threads > 1 and n > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                fits = list(pool.map(solve, range(n)))
        else:
            fits = [solve(j) for j in range(n)]

        indptr = np.zeros(n + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([f.indices.size for f in fits])
        indices = np.concatenate([f.indices for f in fits]) if n else np.zeros(0, dtype=np.int64)
        data = np.concatenate([f.values for f in fits]) if n else np.zeros(0)
        P = sp.csc_matrix((data, indices, indptr), shape=(n, n)).tocsr()
        P.sort_indices()

    fallback = [j for j, f in enumerate(fits) if f.fallback]
    if fallback:
        logger.warning(f"SPAI: {len(fallback)} rank-deficient column(s) fell back to a diagonal entry")
    result = SpaiResult(
        p=P,
        residuals=np.array([f.residual for f in fits]),
        fallback_columns=fallback,
        augmented_columns=sum(1 for f in fits if f.augmented),
        build_seconds=sw.seconds,
    )
    logger.debug(
        f"SPAI n={n} nnz={P.nnz} frobenius residual={result.frobenius_residual:.3e} "
        f"augmented={result.augmented_columns} in {sw.seconds:.3f}s"
    )
    return result


def spai_build(A: sp.spmatrix, cfg: SpaiConfig | None = None, *, threads: int = 1) -> SpaiResult:
    """P ~ A^{-1} with the configured pattern; `.p` is the preconditioner."""
    return fit_columns(A, cfg or SpaiConfig(), threads=threads)
