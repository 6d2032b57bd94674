"""
Bilinear IRKA. Every sweep solves two n*r Kronecker-structured systems by
GMRES; with reuse on, each side keeps one vertical preconditioner chain over
the explicit sparse form of its operator.
"""

from __future__ import annotations

import logging
import math

import numpy as np
import scipy.sparse as sp

from reusemor.core.errors import GmresFailure, ProjectionError, ReductionFailed
from reusemor.linalg.chain import PrecondEvent, PreconditionerFactory
from reusemor.linalg.kron import KroneckerOperator
from reusemor.models.common import Direction, PrecondKind, PrecondMode
from reusemor.models.mor import BirkaConfig, BirkaState
from reusemor.models.report import ReductionReport
from reusemor.models.systems import BilinearSystem
from reusemor.mor.common import open_row, solve_columns
from reusemor.mor.projection import oblique_inverse, orth, project, restrict


logger = logging.getLogger(__name__)

SIDES = ("V", "W")


def birka_assemble_explicit(op: KroneckerOperator, nnz_cap: int | None = 200_000) -> sp.csr_matrix:
    return op.assemble(nnz_cap=nnz_cap)


def real_block_diagonalize(K: np.ndarray, *, cond_max: float = 1e12) -> tuple[np.ndarray, np.ndarray]:
    """
    K = R Lambda R^{-1} with Lambda real block diagonal: a 1x1 block per real
    eigenvalue, [[a, b], [-b, a]] per pair a +- ib. Blocks follow the
    eigenvalues sorted by (real, imag).
    """
    K = np.asarray(K, dtype=np.float64)
    r = K.shape[0]
    w, X = np.linalg.eig(K)
    scale = max(float(np.max(np.abs(w))), 1.0) if w.size else 1.0
    order = np.lexsort((w.imag, w.real))
    w, X = w[order], X[:, order]

    Lambda = np.zeros((r, r))
    cols: list[np.ndarray] = []
    used = np.zeros(r, dtype=bool)
    k = 0
    for idx in range(r):
        if used[idx]:
            continue
        lam = w[idx]
        if abs(lam.imag) <= 1e-12 * scale:
            Lambda[k, k] = lam.real
            cols.append(X[:, idx].real)
            used[idx] = True
            k += 1
            continue
        # partner: the conjugate eigenvalue not used yet
        partner = next(
            (p for p in range(r) if not used[p] and p != idx and abs(w[p] - np.conj(lam)) <= 1e-8 * scale),
            None,
        )
        if partner is None:
            raise ProjectionError(f"eigenvalue {lam} of the reduced matrix has no conjugate partner")
        pos = idx if lam.imag > 0 else partner
        a, b = w[pos].real, w[pos].imag
        x = X[:, pos]
        Lambda[k : k + 2, k : k + 2] = [[a, b], [-b, a]]
        cols.extend([x.real, x.imag])
        used[idx] = used[partner] = True
        k += 2

    R = np.column_stack(cols)
    c = np.linalg.cond(R)
    if not np.isfinite(c) or c > cond_max:
        raise ProjectionError(f"reduced matrix is not diagonalizable (eigenvector condition number {c:.2e})")
    return Lambda, R


def _spectral_radius(A: sp.spmatrix, rng: np.random.Generator, iterations: int = 30) -> float:
    x = rng.standard_normal(A.shape[0])
    x /= np.linalg.norm(x)
    est = 0.0
    for _ in range(iterations):
        y = A @ x
        est = float(np.linalg.norm(y))
        if est == 0.0:
            return 0.0
        x = y / est
    return est


def birka_initial_guess(sys: BilinearSystem, r: int, seed: int = 0) -> BirkaState:
    """
    Diagonal K_r with eigenvalues -logspace over the magnitude range of K's
    spectrum (power iterations), N_r = 0, random unit F_r and C_r columns.
    """
    rng = np.random.default_rng(seed)
    hi = _spectral_radius(sys.K, rng)
    if hi == 0.0:
        hi = 1.0
    shifted = sys.K + hi * sp.identity(sys.n, format="csr")
    lo = max(hi - _spectral_radius(shifted, rng), hi * 1e-6)
    mags = np.logspace(np.log10(lo), np.log10(hi), r) if r > 1 else np.array([math.sqrt(lo * hi)])
    F = rng.standard_normal((r, sys.m))
    F /= np.linalg.norm(F, axis=0, keepdims=True)
    C = rng.standard_normal((r, sys.q))
    C /= np.linalg.norm(C, axis=0, keepdims=True)
    return BirkaState(
        K=-np.diag(mags),
        N=tuple(np.zeros((r, r)) for _ in sys.N),
        F=F,
        C=C,
    )


def _diagonalize(state: BirkaState, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    try:
        return real_block_diagonalize(state.K)
    except ProjectionError as e:
        size = np.linalg.norm(state.K) or 1.0
        logger.warning(f"{e}; retrying once with a 1e-8 relative perturbation")
        perturbed = state.K + 1e-8 * size * rng.standard_normal(state.K.shape)
        return real_block_diagonalize(perturbed)


def birka_operators(sys: BilinearSystem, state: BirkaState, Lambda: np.ndarray, R: np.ndarray):
    """V- and W-side Kronecker operators with their right-hand sides vec(.)."""
    Rinv = np.linalg.inv(R)
    Nt = [Rinv @ Nj @ R for Nj in state.N]
    Bt = Rinv @ state.F
    opV = KroneckerOperator(Lambda, sys.K, [(Ntj.T, Nj) for Ntj, Nj in zip(Nt, sys.N)])
    rhsV = (sys.F @ Bt.T).ravel(order="F")
    opW = KroneckerOperator(Lambda.T, sys.K.T, [(Ntj, Nj.T) for Ntj, Nj in zip(Nt, sys.N)])
    rhsW = (sys.C @ (state.C.T @ R)).ravel(order="F")
    return (opV, np.asarray(rhsV).ravel()), (opW, np.asarray(rhsW).ravel())


def petrov_galerkin(sys: BilinearSystem, V: np.ndarray, W: np.ndarray) -> tuple:
    Ginv = oblique_inverse(W, V)
    K = Ginv @ project(sys.K, V, W)
    N = tuple(Ginv @ project(Nj, V, W) for Nj in sys.N)
    F = Ginv @ restrict(sys.F, W)
    C = restrict(sys.C, V)
    return K, N, F, C


def birka_reduce(
    sys: BilinearSystem,
    cfg: BirkaConfig | None = None,
    init: BirkaState | None = None,
    precond_mode: PrecondMode | str = PrecondMode.REUSE,
) -> tuple[BirkaState, ReductionReport]:
    cfg = cfg or BirkaConfig()
    mode = PrecondMode.parse(precond_mode)
    state = init or birka_initial_guess(sys, cfg.r, cfg.seed)
    if state.r != cfg.r:
        raise ProjectionError(f"initial guess has order {state.r}, expected r={cfg.r}")
    rng = np.random.default_rng(cfg.seed)
    report = ReductionReport(algorithm="birka", precond_mode=mode.value)
    factories = {side: PreconditionerFactory(mode, cfg.reuse) for side in SIDES}
    previous: dict[str, tuple] = {}
    eig_changes: list[float] = []
    old_eigs = state.eigenvalues()
    n, r = sys.n, cfg.r

    for z in range(1, cfg.max_sweeps + 1):
        Lambda, R = _diagonalize(state, rng)
        bases: dict[str, np.ndarray] = {}
        for side, (op, rhs) in zip(SIDES, birka_operators(sys, state, Lambda, R)):
            if mode is PrecondMode.NONE:
                A = None
                event = PrecondEvent(chain=None, kind=PrecondKind.NONE)
            else:
                A = birka_assemble_explicit(op, cfg.kron_nnz_cap)
                prev = previous.get(side)
                if prev is None:
                    event = factories[side].fresh(A)
                else:
                    event = factories[side].next(
                        A,
                        prev_chain=prev[0],
                        A_prev=prev[1],
                        direction=Direction.VERTICAL,
                        from_index=(z - 1, 1),
                        to_index=(z, 1),
                    )
                previous[side] = (event.chain, A)
            row = report.add(open_row(event, sweep=z, point=1, shift=math.nan, solve_kind="kron", side=side))
            try:
                x = solve_columns(op, event, rhs, cfg.gmres, row)
            except GmresFailure as e:
                raise ReductionFailed(
                    f"GMRES failed on the {side} side at sweep {z}: {e}", coords=(side, z), report=report
                ) from e
            bases[side] = orth(x.reshape((n, r), order="F"))

        V, W = bases["V"], bases["W"]
        if V.shape[1] < r or W.shape[1] < r:
            raise ProjectionError(f"sweep {z}: projection bases lost rank (V: {V.shape[1]}, W: {W.shape[1]}, r={r})")
        K, N, F, C = petrov_galerkin(sys, V, W)
        state = BirkaState(K=K, N=N, F=F, C=C, sweep=z, Lambda=Lambda, R=R, V=V, W=W)
        new_eigs = state.eigenvalues()
        denom = np.linalg.norm(old_eigs)
        change = float(np.linalg.norm(new_eigs - old_eigs) / (denom if denom > 0 else 1.0))
        eig_changes.append(change)
        logger.info(f"BIRKA sweep {z}: eigenvalue change {change:.3e}")
        old_eigs = new_eigs
        if change < cfg.tol:
            state.converged = True
            break

    if not state.converged:
        logger.warning(f"BIRKA stopped after {cfg.max_sweeps} sweeps without reaching tol={cfg.tol}")
    report.meta.update(
        {
            "r": r,
            "sweeps": state.sweep,
            "converged": state.converged,
            "eigenvalue_change": eig_changes,
            "eigenvalues": [[float(v.real), float(v.imag)] for v in state.eigenvalues()],
        }
    )
    return state, report
