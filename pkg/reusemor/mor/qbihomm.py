"""
Higher-order moment matching for SISO quadratic-bilinear systems
(QB-IHOMM). One preconditioner serves all moment solves at a shift; with
reuse on, each side carries a horizontal chain across the shifts.
"""

from __future__ import annotations

import logging

import numpy as np
import scipy.sparse as sp

from reusemor.core.errors import DimensionMismatch, GmresBreakdown, GmresFailure, ReductionFailed, SingularShiftError
from reusemor.linalg.chain import PreconditionerFactory
from reusemor.linalg.sparse import as_csr
from reusemor.models.common import Direction, PrecondMode
from reusemor.models.mor import QbConfig, ReducedQb
from reusemor.models.report import ReductionReport
from reusemor.models.systems import QbSystem
from reusemor.mor.common import open_row, solve_columns
from reusemor.mor.projection import orth, project, restrict


logger = logging.getLogger(__name__)

# entries per chunk of the H compression
_CHUNK = 2_000_000


def kron_compress_quadratic(H: sp.spmatrix, U: np.ndarray) -> np.ndarray:
    """
    U^T H (U kron U) without forming U kron U. Entry H[a, b*n + c] adds
    h * U[a, :]^T (U[b, :] kron U[c, :]) to the r x r^2 result.
    """
    U = np.asarray(U, dtype=np.float64)
    n, r = U.shape
    if H.shape != (n, n * n):
        raise DimensionMismatch(f"H must be {n}x{n * n} for U with {n} rows, got {H.shape}")
    coo = sp.coo_matrix(H)
    out = np.zeros((r, r * r))
    if coo.nnz == 0:
        return out
    a, col, h = coo.row, coo.col, coo.data
    b, c = np.divmod(col, n)
    step = max(1, _CHUNK // max(r * r, 1))
    for lo in range(0, coo.nnz, step):
        sl = slice(lo, lo + step)
        Ub, Uc = U[b[sl]], U[c[sl]]
        pairs = (Ub[:, :, None] * Uc[:, None, :]).reshape(-1, r * r)
        out += U[a[sl]].T @ (h[sl, None] * pairs)
    return out


def _side_matrices(sys: QbSystem, sigma: float, side: str) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """(system matrix, moment multiplier) for one side at one interpolation point."""
    if side == "V":
        return as_csr(sigma * sys.D - sys.K), sys.D
    return as_csr((2.0 * sigma * sys.D - sys.K).T), as_csr(sys.D.T)


def qbihomm_reduce(
    sys: QbSystem,
    cfg: QbConfig | None = None,
    precond_mode: PrecondMode | str | None = None,
) -> tuple[ReducedQb, ReductionReport]:
    """
    V collects [(s D - K)^{-1} D]^j (s D - K)^{-1} F for j <= P+Q, W the
    transposed moments at 2s for j <= Q; U = orth([V W]).

    precond_mode defaults to reuse or fresh SPAI according to cfg.reuse.
    """
    cfg = cfg or QbConfig()
    if precond_mode is None:
        mode = PrecondMode.REUSE if cfg.reuse else PrecondMode.FRESH
    else:
        mode = PrecondMode.parse(precond_mode)
    report = ReductionReport(algorithm="qbihomm", precond_mode=mode.value)
    sides = {
        "V": (sys.f_vector(), cfg.p_moments + cfg.q_moments),
        "W": (sys.c_vector(), cfg.q_moments),
    }
    columns: list[np.ndarray] = []

    for side, (rhs0, powers) in sides.items():
        factory = PreconditionerFactory(mode, cfg.precond)
        prev: tuple | None = None
        for i, sigma in enumerate(cfg.sigmas, start=1):
            shift = sigma if side == "V" else 2.0 * sigma
            A, Dm = _side_matrices(sys, sigma, side)
            if prev is None:
                event = factory.fresh(A)
            else:
                event = factory.next(
                    A,
                    prev_chain=prev[0],
                    A_prev=prev[1],
                    direction=Direction.HORIZONTAL,
                    from_index=(1, i - 1),
                    to_index=(1, i),
                )
            prev = (event.chain, A)
            row = report.add(open_row(event, sweep=1, point=i, shift=shift, solve_kind="moment", side=side))
            rhs = rhs0
            for j in range(powers + 1):
                try:
                    x = solve_columns(A, event, rhs, cfg.gmres, row)[:, 0]
                except GmresBreakdown as e:
                    raise SingularShiftError(
                        f"{side} side: shifted matrix at sigma={sigma:g} looks singular ({e})", shift=sigma
                    ) from e
                except GmresFailure as e:
                    raise ReductionFailed(
                        f"GMRES failed on the {side} side at point {i} (sigma={sigma:g}), moment {j}: {e}",
                        coords=(side, i, j),
                        report=report,
                    ) from e
                nrm = np.linalg.norm(x)
                if nrm == 0.0:
                    logger.warning(f"{side} side, sigma={sigma:g}: moment {j} vanished; stopping this point")
                    break
                x = x / nrm
                columns.append(x)
                rhs = Dm @ x
            logger.debug(f"{side} side, point {i}: {row.solves} solves, {row.gmres_iterations} iterations")

    U = orth(np.column_stack(columns), cfg.rank_tol)
    red = ReducedQb(
        D=project(sys.D, U),
        K=project(sys.K, U),
        N=project(sys.N, U),
        H=kron_compress_quadratic(sys.H, U),
        F=restrict(sys.F, U),
        C=restrict(sys.C, U),
        U=U,
    )
    report.meta.update(
        {
            "r": red.r,
            "candidate_columns": len(columns),
            "build_counts_V": report.build_counts("V"),
            "build_counts_W": report.build_counts("W"),
        }
    )
    logger.info(f"QB-IHOMM: r={red.r} from {len(columns)} moment vectors")
    return red, report
