"""Full (non-restarted) right-preconditioned GMRES."""

from __future__ import annotations

import logging
import time
from collections.abc import Callable

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator

from reusemor.core.errors import DimensionMismatch, GmresBreakdown, GmresNotConverged
from reusemor.models.solver import GmresConfig, GmresReport


logger = logging.getLogger(__name__)

Operator = Callable[[np.ndarray], np.ndarray]


def as_operator(A) -> Operator:
    """Wraps matrices, LinearOperators and callables into a vector map."""
    if A is None:
        return lambda v: v
    if callable(A) and not isinstance(A, (LinearOperator, np.ndarray)) and not sp.issparse(A):
        return A
    if isinstance(A, LinearOperator):
        return A.matvec
    return lambda v: np.asarray(A @ v, dtype=np.float64).ravel()


def _givens(a: float, b: float) -> tuple[float, float]:
    if b == 0.0:
        return 1.0, 0.0
    r = np.hypot(a, b)
    return a / r, b / r


def gmres_right_preconditioned(
    apply_A,
    apply_P,
    b,
    cfg: GmresConfig | None = None,
) -> tuple[np.ndarray, GmresReport]:
    """
    Solves A x = b as (A P) x~ = b, x = P x~, starting from x0 = 0.

    Operators are consumed only through vector application. Raises
    GmresBreakdown when the Arnoldi process stalls before the tolerance is
    met and GmresNotConverged at max_iter; both carry the partial result.
    """
    cfg = cfg or GmresConfig()
    A = as_operator(apply_A)
    P = as_operator(apply_P)
    b = np.asarray(b, dtype=np.float64).ravel()
    n = b.shape[0]

    report = GmresReport()
    t0 = time.perf_counter()
    beta = float(np.linalg.norm(b))
    report.b_norm = beta
    if beta == 0.0:
        report.converged = True
        report.true_relative_residual = 0.0
        report.residual_history = [0.0] if cfg.record_history else []
        return np.zeros(n), report

    target = cfg.rel_tol * beta
    max_iter = min(cfg.max_iter, n) if n > 0 else cfg.max_iter

    V = np.zeros((n, max_iter + 1))
    V[:, 0] = b / beta
    H = np.zeros((max_iter + 1, max_iter))
    cs = np.zeros(max_iter)
    sn = np.zeros(max_iter)
    g = np.zeros(max_iter + 1)
    g[0] = beta
    history = [beta]

    def solution(k: int) -> np.ndarray:
        if k == 0:
            return np.zeros(n)
        y = sla.solve_triangular(H[:k, :k], g[:k], lower=False, check_finite=False)
        return np.asarray(P(V[:, :k] @ y), dtype=np.float64).ravel()

    def finish(k: int, converged: bool) -> GmresReport:
        report.iterations = k
        report.converged = converged
        report.residual_history = history if cfg.record_history else [history[-1]]
        report.solve_seconds = time.perf_counter() - t0
        return report

    tiny = np.finfo(float).tiny
    eps = np.finfo(float).eps
    k = 0
    for j in range(max_iter):
        z = np.asarray(P(V[:, j]), dtype=np.float64).ravel()
        w = np.asarray(A(z), dtype=np.float64).ravel()
        if w.shape[0] != n:
            raise DimensionMismatch(f"operator returned length {w.shape[0]}, expected {n}")

        # modified Gram-Schmidt, one extra pass when orthogonality leaks
        for i in range(j + 1):
            h = float(V[:, i] @ w)
            H[i, j] = h
            w -= h * V[:, i]
        h_next = float(np.linalg.norm(w))
        if h_next > 0.0:
            leak = float(np.max(np.abs(V[:, : j + 1].T @ w))) / h_next
            if leak > cfg.reorth_tol:
                for i in range(j + 1):
                    h = float(V[:, i] @ w)
                    H[i, j] += h
                    w -= h * V[:, i]
                h_next = float(np.linalg.norm(w))
        H[j + 1, j] = h_next

        for i in range(j):
            hi, hi1 = H[i, j], H[i + 1, j]
            H[i, j] = cs[i] * hi + sn[i] * hi1
            H[i + 1, j] = -sn[i] * hi + cs[i] * hi1
        cs[j], sn[j] = _givens(H[j, j], H[j + 1, j])
        H[j, j] = cs[j] * H[j, j] + sn[j] * H[j + 1, j]
        H[j + 1, j] = 0.0
        g[j + 1] = -sn[j] * g[j]
        g[j] = cs[j] * g[j]
        history.append(abs(float(g[j + 1])))
        k = j + 1

        breakdown = h_next <= eps * max(1.0, abs(H[j, j]))
        if breakdown and abs(H[j, j]) <= tiny:
            # singular projected system: nothing left to solve with
            report.breakdown = True
            x = solution(j)
            finish(k, False)
            raise GmresBreakdown(
                f"GMRES breakdown at iteration {k}: zero Arnoldi vector with singular projection",
                x=x,
                report=report,
            )

        if history[-1] <= target or breakdown:
            x = solution(k)
            true_res = float(np.linalg.norm(b - np.asarray(A(x)).ravel()))
            report.true_relative_residual = true_res / beta
            if true_res <= target:
                logger.debug(f"GMRES converged in {k} iterations (relative residual {true_res / beta:.2e})")
                return x, finish(k, True)
            if breakdown:
                report.breakdown = True
                finish(k, False)
                raise GmresBreakdown(
                    f"GMRES breakdown at iteration {k}: residual {true_res / beta:.2e} above tolerance",
                    x=x,
                    report=report,
                )
            # estimate drifted from the true residual; keep iterating
        V[:, j + 1] = w / h_next

    x = solution(k)
    true_res = float(np.linalg.norm(b - np.asarray(A(x)).ravel()))
    report.true_relative_residual = true_res / beta
    if true_res <= target:
        return x, finish(k, True)
    finish(k, False)
    raise GmresNotConverged(
        f"GMRES did not converge in {k} iterations (relative residual {true_res / beta:.2e} > {cfg.rel_tol:.1e})",
        x=x,
        report=report,
    )
